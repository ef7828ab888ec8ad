#pragma once

#include "jitai/env.hpp"
#include "jitai/errors.hpp"
#include "jitai/harness.hpp"
#include "jitai/hybrid.hpp"
#include "jitai/llm.hpp"
#include "jitai/llm_client.hpp"
#include "jitai/plots.hpp"
#include "jitai/rng.hpp"
#include "jitai/thompson.hpp"
#include "jitai/walk.hpp"
