#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/prompts.hpp"
#include "stackrag/text.hpp"
#include "stackrag/types.hpp"

namespace stackrag {

namespace detail {

// "- [Title] URL" → LinkRef. Returns false for lines in any other shape.
inline bool parse_link_line(const std::string& line, LinkRef& out) {
  std::string text = trim_copy(line);
  if (text.size() < 2 || text[0] != '-') return false;
  text = trim_copy(text.substr(1));
  if (text.empty() || text[0] != '[') return false;
  const std::size_t close = text.rfind(']');
  if (close == std::string::npos || close == 0) return false;
  std::string title = trim_copy(text.substr(1, close - 1));
  std::string url = trim_copy(text.substr(close + 1));
  if (url.empty()) return false;
  out = LinkRef{std::move(title), std::move(url)};
  return true;
}

// Collects "- [Title] URL" bullets following the given heading, stopping
// at the first line that is neither a bullet nor blank.
inline std::vector<LinkRef> parse_link_section(const std::string& text,
                                               const std::string& heading) {
  std::vector<LinkRef> out;
  const std::vector<std::string> lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && trim_copy(lines[i]) != heading) ++i;
  for (++i; i < lines.size(); ++i) {
    const std::string line = trim_copy(lines[i]);
    if (line.empty() || line == "...") continue;
    LinkRef link;
    if (!parse_link_line(line, link)) break;
    out.push_back(std::move(link));
  }
  return out;
}

}  // namespace detail

// Final agent: renders the generator prompt and reads the two structured
// link sections back out of the response.
class AnswerGenerator {
 public:
  explicit AnswerGenerator(std::shared_ptr<LlmGateway> gateway)
      : gateway_(std::move(gateway)) {
    if (!gateway_) throw PreconditionError("generator needs a gateway");
  }

  std::string render_prompt(const UserQuery& query,
                            const EvidenceBundle& bundle) const {
    return render_generator_prompt(query, bundle.combined_text,
                                   bundle.unanswered_links);
  }

  GeneratedAnswer generate(const UserQuery& query,
                           const EvidenceBundle& bundle) {
    if (bundle.empty()) {
      throw PreconditionError(
          "cannot generate an answer from an empty evidence bundle");
    }
    GeneratedAnswer out;
    out.text = gateway_->chat({render_prompt(query, bundle)});
    out.used_links = detail::parse_link_section(out.text, "Links used:");
    out.unanswered_links = detail::parse_link_section(
        out.text, "Unanswered questions that you may find useful in the "
                  "future:");

    // A used link that appears in neither the evidence nor the unanswered
    // list was made up by the model; flag it rather than hiding it.
    for (const auto& link : out.used_links) {
      bool known = false;
      for (const auto& item : bundle.items) {
        if (item.link.url == link.url) known = true;
      }
      for (const auto& ref : bundle.unanswered_links) {
        if (ref.url == link.url) known = true;
      }
      if (!known) out.hallucinated_links.push_back(link);
    }
    return out;
  }

 private:
  std::shared_ptr<LlmGateway> gateway_;
};

}  // namespace stackrag
