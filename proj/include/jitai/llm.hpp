#pragma once

#include <array>
#include <cctype>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jitai/rng.hpp"

namespace jitai {

enum class Verdict { Send, NotSend, Unparseable };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Send: return "send";
    case Verdict::NotSend: return "not_send";
    default: return "unparseable";
  }
}

struct Decision {
  Verdict verdict = Verdict::Unparseable;
  std::optional<std::string> reason;
  std::string raw;  // full model output, kept for audit logging
};

// One logged day of the study, as shown to the LLM: the context the action
// was judged against, the behavioral state after the day, the realized
// reward and the executed action.
struct StateRow {
  int t = 0;
  int context = 0;
  double habituation = 0.0;
  double disengagement = 0.0;
  double reward = 0.0;
  int action = 0;
};

inline constexpr std::string_view kDefaultDynamicsDescription =
    "A mobile health app can send a message to the user to encourage the user to walk.\n"
    "The app chooses between: no message (action 0), a generic message (action 1),\n"
    "a message tailored to context 0 (action 2), or a message tailored to context 1 (action 3).\n"
    "Sending a message causes the habituation level to increase.\n"
    "Not sending a message causes the habituation level to decrease.\n"
    "An incorrectly tailored message causes the disengagement risk to increase.\n"
    "A correctly tailored message causes the disengagement risk to decrease.\n";

inline constexpr std::string_view kDefaultQuestion =
    "Should the mobile health app send a message to the user?\n"
    "Answer 'send' or 'not send', then give one short reason.\n";

struct PromptSpec {
  std::string dynamics_description{kDefaultDynamicsDescription};
  int history_window = 4;
  std::vector<StateRow> state_rows;  // chronological, newest last
  std::string preference;
  std::string question{kDefaultQuestion};
};

inline std::string format_state_row(const StateRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "day %d: context=%d, habituation=%.4f, disengagement=%.4f, reward=%.2f, action=%d",
                row.t, row.context, row.habituation, row.disengagement, row.reward, row.action);
  return buf;
}

// Deterministic prompt text: dynamics description, the most recent
// `history_window` state rows, the quoted user preference, the question.
inline std::string build_prompt(const PromptSpec& spec) {
  if (spec.history_window < 0) throw std::invalid_argument("history_window must be >= 0");
  if (spec.preference.empty()) throw std::invalid_argument("prompt requires a user preference");
  std::string out = spec.dynamics_description;
  if (!out.empty() && out.back() != '\n') out += '\n';
  const std::size_t window =
      std::min<std::size_t>(spec.state_rows.size(), static_cast<std::size_t>(spec.history_window));
  if (window > 0) {
    out += "The user current state and previous data:\n";
    for (std::size_t i = spec.state_rows.size() - window; i < spec.state_rows.size(); ++i) {
      out += format_state_row(spec.state_rows[i]);
      out += '\n';
    }
  }
  out += "The user preference is \"" + spec.preference + "\".\n";
  out += spec.question;
  if (!spec.question.empty() && spec.question.back() != '\n') out += '\n';
  return out;
}

namespace detail {

// "not send" in every phrasing that reaches a clear refusal. Matched against
// lowercased text at word boundaries; the curly-apostrophe variants cover
// typical chat output verbatim.
inline constexpr std::array<std::string_view, 18> kNegationPatterns = {
    "not send",       "not to send",          "do not send",
    "don't send",     "don’t send",      "dont send",
    "cannot send",    "can't send",           "can’t send",
    "cant send",      "should not send",      "shouldn't send",
    "shouldn’t send", "never send",      "not be sent",
    "never be sent",  "avoid sending",        "no message",
};

inline constexpr std::array<std::string_view, 2> kAffirmativeTokens = {"send", "sent"};

inline bool is_ascii_alpha(char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
}

inline std::string lowercase_ascii(std::string_view text) {
  std::string out(text);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

inline bool word_boundary_before(std::string_view text, std::size_t pos) {
  return pos == 0 || !is_ascii_alpha(text[pos - 1]);
}

struct TokenMatch {
  std::size_t begin = std::string_view::npos;
  std::size_t end = 0;
};

// Reason text = whatever follows the decision token, minus the tail of the
// word the token landed in and any separator punctuation.
inline std::optional<std::string> extract_reason(std::string_view raw, std::size_t token_end) {
  std::size_t pos = token_end;
  while (pos < raw.size() && is_ascii_alpha(raw[pos])) ++pos;
  while (pos < raw.size()) {
    const unsigned char ch = raw[pos];
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '.' || ch == ',' ||
        ch == ':' || ch == ';' || ch == '!' || ch == '?' || ch == '-' || ch == '"' ||
        ch == '\'') {
      ++pos;
      continue;
    }
    // U+2013/U+2014 dashes show up as separators in chat output
    if (ch == 0xe2 && pos + 2 < raw.size() && static_cast<unsigned char>(raw[pos + 1]) == 0x80 &&
        (static_cast<unsigned char>(raw[pos + 2]) == 0x93 ||
         static_cast<unsigned char>(raw[pos + 2]) == 0x94)) {
      pos += 3;
      continue;
    }
    break;
  }
  std::size_t end = raw.size();
  while (end > pos && (raw[end - 1] == ' ' || raw[end - 1] == '\t' || raw[end - 1] == '\r' ||
                       raw[end - 1] == '\n')) {
    --end;
  }
  if (pos >= end) return std::nullopt;
  return std::string(raw.substr(pos, end - pos));
}

}  // namespace detail

// Total over arbitrary bytes; never throws. The earliest decision token wins,
// and a negation span beats any "send" it contains.
inline Decision parse_decision(std::string_view raw) {
  Decision decision;
  decision.raw = std::string(raw);

  const std::string text = detail::lowercase_ascii(raw);
  struct Span {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Span> negation_spans;
  detail::TokenMatch first_negation;
  for (const auto pattern : detail::kNegationPatterns) {
    for (std::size_t pos = text.find(pattern); pos != std::string::npos;
         pos = text.find(pattern, pos + 1)) {
      if (!detail::word_boundary_before(text, pos)) continue;
      negation_spans.push_back({pos, pos + pattern.size()});
      if (pos < first_negation.begin) first_negation = {pos, pos + pattern.size()};
    }
  }

  detail::TokenMatch first_affirmative;
  for (const auto token : detail::kAffirmativeTokens) {
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + 1)) {
      if (!detail::word_boundary_before(text, pos)) continue;
      const std::size_t end = pos + token.size();
      bool covered = false;
      for (const auto& span : negation_spans) {
        if (pos >= span.begin && end <= span.end) {
          covered = true;
          break;
        }
      }
      if (covered) continue;
      if (pos < first_affirmative.begin) first_affirmative = {pos, end};
      break;  // later matches of the same token can only be farther right
    }
  }

  const bool has_negation = first_negation.begin != std::string_view::npos;
  const bool has_affirmative = first_affirmative.begin != std::string_view::npos;
  if (has_negation && (!has_affirmative || first_negation.begin < first_affirmative.begin)) {
    decision.verdict = Verdict::NotSend;
    decision.reason = detail::extract_reason(raw, first_negation.end);
  } else if (has_affirmative) {
    decision.verdict = Verdict::Send;
    decision.reason = detail::extract_reason(raw, first_affirmative.end);
  } else {
    decision.verdict = Verdict::Unparseable;
  }
  return decision;
}

// Deterministic stand-in for the LLM: refuses to send while a preference is
// active, except for a configurable ambiguous-wording mistake rate.
inline Decision mock_oracle(const std::optional<std::string>& preference, double ambiguity_rate,
                            Rng& rng) {
  if (!(ambiguity_rate >= 0.0 && ambiguity_rate <= 1.0)) {
    throw std::invalid_argument("ambiguity_rate must be in [0,1]");
  }
  if (!preference.has_value()) {
    throw std::logic_error("mock_oracle requires an active preference");
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const bool mistake = ambiguity_rate >= 1.0 || u < ambiguity_rate;
  Decision decision;
  decision.verdict = mistake ? Verdict::Send : Verdict::NotSend;
  decision.raw = mistake ? "send" : "not send";
  return decision;
}

}  // namespace jitai
