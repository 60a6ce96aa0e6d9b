#include "structeval/model.hpp"

namespace structeval {

std::string render_messages(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const ChatMessage& m : messages) {
    out += m.role;
    out += '\x1f';
    out += m.content;
    out += '\x1e';
  }
  return out;
}

} // namespace structeval
