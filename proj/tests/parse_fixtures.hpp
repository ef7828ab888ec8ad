#pragma once

#include <string>
#include <vector>

#include "jitai/llm.hpp"

namespace jitai_test {

struct ParseFixture {
  std::string raw;
  jitai::Verdict verdict;
};

// Canned model responses covering affirmative, negated, mixed-case,
// reason-first and no-decision styles. The first three mirror the published
// validation examples (sore leg, dizzy, anxiety).
inline const std::vector<ParseFixture>& parse_fixtures() {
  using jitai::Verdict;
  static const std::vector<ParseFixture> fixtures = {
      {"not send. The user has a sore leg, indicating they cannot walk. The app should not send "
       "a message.",
       Verdict::NotSend},
      {"not send. The user is feeling dizzy, which means they cannot walk, so the mobile health "
       "app should not send a message.",
       Verdict::NotSend},
      {"send. The user is expressing anxiety, and a tailored message could be helpful.",
       Verdict::Send},
      {"Send", Verdict::Send},
      {"sent", Verdict::Send},
      {"not send", Verdict::NotSend},
      {"NOT SEND", Verdict::NotSend},
      {"Do not send the message today.", Verdict::NotSend},
      {"I would not send a message because the user twisted an ankle.", Verdict::NotSend},
      {"The app should not send anything right now — the user cannot walk.",
       Verdict::NotSend},
      {"Decision: send. Reason: the user seems ready for encouragement.", Verdict::Send},
      {"don't send — the user is recovering from surgery.", Verdict::NotSend},
      {"Don’t send. The user has joint pain.", Verdict::NotSend},
      {"You should send a message; the user can walk today.", Verdict::Send},
      {"Cannot send now, the user is unable to walk.", Verdict::NotSend},
      {"No message should be sent today.", Verdict::NotSend},
      {"It is best to avoid sending a message while the user is injured.", Verdict::NotSend},
      {"The message should not be sent until the user recovers.", Verdict::NotSend},
      {"Never send messages when the user reports an injury.", Verdict::NotSend},
      {"Please do not send anything. The user cannot walk.", Verdict::NotSend},
      {"shouldn’t send – ankle injury", Verdict::NotSend},
      {"It would be better not to send a message right now.", Verdict::NotSend},
      {"dont send", Verdict::NotSend},
      {"Send it now; do not send more than one though.", Verdict::Send},
      {"send\nThe user can walk.", Verdict::Send},
      {"cant send, sorry", Verdict::NotSend},
      {"", Verdict::Unparseable},
      {"The user state looks stable; continue monitoring.", Verdict::Unparseable},
      {"maybe later", Verdict::Unparseable},
      {"Resend later.", Verdict::Unparseable},
      {"The consent form is missing.", Verdict::Unparseable},
  };
  return fixtures;
}

}  // namespace jitai_test
