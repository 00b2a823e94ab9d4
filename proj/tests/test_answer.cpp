#include <memory>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "stackrag/answer.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/llm_mock.hpp"
#include "support.hpp"

using namespace stackrag;
using testsupport::kGeneratorMark;

namespace {

const UserQuery kQuery("How do I scale websockets?");

std::shared_ptr<ScriptedGateway> gateway() {
  return std::make_shared<ScriptedGateway>(testsupport::test_gateway_config());
}

EvidenceBundle make_bundle() {
  EvidenceBundle bundle;
  EvidenceItem item;
  item.question_id = 42;
  item.document_text = "Scaling title\nQuestion:\nuse a broker";
  item.link = LinkRef{"Scaling title", "https://stackoverflow.com/q/42"};
  item.cosine_score = 0.9;
  item.relevance = Relevance::scored(5);
  bundle.items.push_back(item);

  EvidenceItem second = item;
  second.question_id = 43;
  second.link = LinkRef{"Second title", "https://stackoverflow.com/q/43"};
  bundle.items.push_back(second);

  bundle.unanswered_links.push_back(
      LinkRef{"Open question", "https://stackoverflow.com/q/99"});
  bundle.combined_text =
      "----- evidence from https://stackoverflow.com/q/42 -----\n"
      "Scaling title\nQuestion:\nuse a broker\n";
  return bundle;
}

}  // namespace

TEST_CASE("parse_link_line accepts the bullet format") {
  LinkRef link;
  REQUIRE(detail::parse_link_line("- [Title] https://x/1", link));
  CHECK(link.title == "Title");
  CHECK(link.url == "https://x/1");

  REQUIRE(detail::parse_link_line("  -  [Spaced Out]   https://x/2  ", link));
  CHECK(link.title == "Spaced Out");
  CHECK(link.url == "https://x/2");

  // Brackets inside the title survive via the last closing bracket.
  REQUIRE(detail::parse_link_line("- [C++ [templates]] https://x/3", link));
  CHECK(link.title == "C++ [templates]");
}

TEST_CASE("parse_link_line rejects other shapes") {
  LinkRef link;
  CHECK_FALSE(detail::parse_link_line("no bullet", link));
  CHECK_FALSE(detail::parse_link_line("- missing brackets", link));
  CHECK_FALSE(detail::parse_link_line("- [title only]", link));
  CHECK_FALSE(detail::parse_link_line("-", link));
  CHECK_FALSE(detail::parse_link_line("", link));
}

TEST_CASE("parse_link_section reads bullets after the heading") {
  const std::string text =
      "Some answer prose.\n"
      "Links used:\n"
      "- [One] https://x/1\n"
      "\n"
      "- [Two] https://x/2\n"
      "...\n"
      "Trailing prose stops the section.\n"
      "- [Three] https://x/3\n";
  const auto links = detail::parse_link_section(text, "Links used:");
  REQUIRE(links.size() == 2);
  CHECK(links[0].url == "https://x/1");
  CHECK(links[1].url == "https://x/2");
}

TEST_CASE("parse_link_section without the heading is empty") {
  CHECK(detail::parse_link_section("no sections here", "Links used:").empty());
}

TEST_CASE("render_prompt embeds evidence and unanswered links") {
  AnswerGenerator generator(gateway());
  const auto bundle = make_bundle();
  const std::string prompt = generator.render_prompt(kQuery, bundle);
  CHECK(prompt.find(kQuery.text()) != std::string::npos);
  CHECK(prompt.find(bundle.combined_text) != std::string::npos);
  CHECK(prompt.find("- [Open question] https://stackoverflow.com/q/99") !=
        std::string::npos);
  // No placeholder survives rendering.
  CHECK(prompt.find("{question}") == std::string::npos);
  CHECK(prompt.find("{evidence}") == std::string::npos);
  CHECK(prompt.find("{unanswered_question_list}") == std::string::npos);
}

TEST_CASE("generate parses both link sections") {
  auto g = gateway();
  g->enqueue(kGeneratorMark,
             "Use a message broker. The accepted answer covers this.\n"
             "Links used:\n"
             "- [Scaling title] https://stackoverflow.com/q/42\n"
             "- [Second title] https://stackoverflow.com/q/43\n"
             "Unanswered questions that you may find useful in the future:\n"
             "- [Open question] https://stackoverflow.com/q/99\n");
  AnswerGenerator generator(g);
  const auto answer = generator.generate(kQuery, make_bundle());
  REQUIRE(answer.used_links.size() == 2);
  CHECK(answer.used_links[0].url == "https://stackoverflow.com/q/42");
  REQUIRE(answer.unanswered_links.size() == 1);
  CHECK(answer.unanswered_links[0].url == "https://stackoverflow.com/q/99");
  CHECK(answer.hallucinated_links.empty());
  CHECK(answer.text.find("message broker") != std::string::npos);
}

TEST_CASE("generate flags links that were never provided") {
  auto g = gateway();
  g->enqueue(kGeneratorMark,
             "Answer text.\n"
             "Links used:\n"
             "- [Scaling title] https://stackoverflow.com/q/42\n"
             "- [Made up] https://example.com/fabricated\n"
             "- [Open question] https://stackoverflow.com/q/99\n");
  AnswerGenerator generator(g);
  const auto answer = generator.generate(kQuery, make_bundle());
  REQUIRE(answer.hallucinated_links.size() == 1);
  CHECK(answer.hallucinated_links[0].url == "https://example.com/fabricated");
}

TEST_CASE("generate tolerates missing sections") {
  auto g = gateway();
  g->enqueue(kGeneratorMark, "Just prose, no sections.");
  AnswerGenerator generator(g);
  const auto answer = generator.generate(kQuery, make_bundle());
  CHECK(answer.used_links.empty());
  CHECK(answer.unanswered_links.empty());
  CHECK(answer.hallucinated_links.empty());
  CHECK(answer.text == "Just prose, no sections.");
}

TEST_CASE("generate refuses an empty bundle") {
  AnswerGenerator generator(gateway());
  CHECK_THROWS_AS(generator.generate(kQuery, EvidenceBundle{}),
                  PreconditionError);
}

TEST_CASE("generator requires a gateway") {
  CHECK_THROWS_AS(AnswerGenerator(nullptr), PreconditionError);
}
