#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stackrag/types.hpp"

namespace stackrag {

// Fixed role prompts for the five agents. Placeholders ({question},
// {evidence}, {unanswered_question_list}) are substituted by the render
// functions below; substituted values are inserted verbatim and never
// re-scanned for placeholders.

inline constexpr std::string_view kComplexityCheckerPrompt =
    "You are a part of RAG architecture that specializes in generating "
    "answers to user's given query using Stack Overflow.\n"
    "You are going to be provided the user question. Your task is to "
    "determine whether the question is complex enough to be divided into "
    "sub-questions.\n"
    "If, in order to answer the question, different topics have to be "
    "covered, return TRUE, all in capital letters. If there are multiple "
    "simple questions, in the given question, again, return TRUE. Otherwise, "
    "if you think that the question is not complex and there is no need to "
    "divide it into sub-questions, return FALSE.\n"
    "Do not provide explanations for your choice, t=output a single word, "
    "either TRUE or FALSE.\n"
    "Question: {question}";

inline constexpr std::string_view kKeywordExtractorPrompt =
    "You are a question-to-query parser. You are given a technical question. "
    "You have to use the question to create a Python list of search queries "
    "that will be useful in conducting a search in Stack Overflow. Make "
    "every query in the list as short as possible. Having less words will "
    "produce better results. But make sure you do not omit important search "
    "terms and make the search query too general. It does not have to be a "
    "complete sentence. Every single query in the list MUST be less than 4 "
    "words. Output MUST be a Python list with every element enclosed with "
    "double quotes. Question: {question}";

inline constexpr std::string_view kEvidenceScorerPrompt =
    "You are a part of RAG architecture that specializes in generating "
    "answers to user's given query using Stack Overflow.\n"
    "Provided the gathered evidence from Stack Overflow as well as the "
    "user's given question, your task is to determine how useful the "
    "evidence is in order to answer the user question. The evidence includes "
    "a question and its corresponding answer from Stack Overflow. Rate the "
    "given evidence on the scale from 1 to 5, with 1 indicating not useful "
    "and 5 indicating really useful. If the evidence is not useful at all, "
    "return \"not useful\" all in lowercase. Only output either a number "
    "from 1-5 or \"not useful\" with no explanation.\n"
    "Gathered Evidence:\n"
    "{evidence}\n"
    "User Question:\n"
    "{question}";

inline constexpr std::string_view kEvidenceCheckerPrompt =
    "You are a part of RAG architecture that specializes in generating "
    "answers to user's given query using Stack Overflow.\n"
    "Provided the gathered evidence from Stack Overflow as well as the "
    "user's given question, your task is to determine whether you have "
    "enough evidence to answer the question or not.\n"
    "Do not generate answer even if you have enough evidence. The evidence "
    "does not have to directly answer the question, but it has to provide "
    "the basis upon which you can form the answer. If no such evidence is "
    "provided, return \"FALSE\", do not use your own knowledge to answer "
    "the question.\n"
    "Your output must be a single word, either \"TRUE\" or \"FALSE\". All "
    "letters must be capital, do not explain why you chose a specific "
    "answer, only output either \"TRUE\" or \"FALSE\"\n"
    "Gathered Evidence: {evidence}\n"
    "User Question: {question}";

inline constexpr std::string_view kAnswerGeneratorPrompt =
    "You are a part of RAG architecture that specializes in generating "
    "answers to user's given query using Stack Overflow.\n"
    "You are the final piece of this architecture, your task is to "
    "construct the final answer based on the given question and the "
    "provided evidence.\n"
    "Be as thorough as possible, if you write code, do not omit anything, "
    "write every single detail.\n"
    "Indicate whether the answer that you used in generating the response "
    "was an accepted answer in Stack Overflow or not.\n"
    "At the end of your answer, mention all the links of the answers that "
    "you used in the following format:\n"
    "Links used:\n"
    "- [Question Title] Link1\n"
    "- [Question Title] Link2\n"
    "- [Question Title] Link3\n"
    "...\n"
    "You will also be provided a list of questions which are unanswered but "
    "are relevant to the user query, include their links at the end in the "
    "following format:\n"
    "Unanswered questions that you may find useful in the future:\n"
    "- [Question Title] Link1\n"
    "- [Question Title] Link2\n"
    "- [Question Title] Link3\n"
    "...\n"
    "User Question: {question}\n"
    "Gathered Evidence: {evidence}\n"
    "Unanswered Question List: {unanswered_question_list}";

// Sub-question decomposition has specified behavior but no fixed wording
// upstream of this tool, so the prompt is our own. One sub-question per
// line keeps parsing trivial.
inline constexpr std::string_view kSubQuestionPrompt =
    "You are a part of RAG architecture that specializes in generating "
    "answers to user's given query using Stack Overflow.\n"
    "The user question below is complex. Break it down into self-contained "
    "sub-questions that can each be answered independently.\n"
    "Output one sub-question per line. Do not number the lines, do not add "
    "bullets, do not explain.\n"
    "Question: {question}";

namespace detail {

struct Substitution {
  std::string_view token;
  std::string_view value;
};

// Single pass over the template: each placeholder hit is replaced by its
// value and the scan resumes after the placeholder, so substituted values
// are never themselves scanned for placeholders.
inline std::string substitute(std::string_view tmpl,
                              std::initializer_list<Substitution> subs) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t best_hit = std::string_view::npos;
    const Substitution* best = nullptr;
    for (const auto& s : subs) {
      std::size_t hit = tmpl.find(s.token, pos);
      if (hit < best_hit) {
        best_hit = hit;
        best = &s;
      }
    }
    if (best == nullptr) break;
    out.append(tmpl.substr(pos, best_hit - pos));
    out.append(best->value);
    pos = best_hit + best->token.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

}  // namespace detail

inline std::string render_complexity_prompt(const UserQuery& query) {
  return detail::substitute(kComplexityCheckerPrompt,
                            {{"{question}", query.text()}});
}

inline std::string render_keyword_prompt(const UserQuery& query) {
  return detail::substitute(kKeywordExtractorPrompt,
                            {{"{question}", query.text()}});
}

inline std::string render_subquestion_prompt(const UserQuery& query) {
  return detail::substitute(kSubQuestionPrompt,
                            {{"{question}", query.text()}});
}

inline std::string render_scorer_prompt(std::string_view evidence,
                                        const UserQuery& query) {
  return detail::substitute(kEvidenceScorerPrompt,
                            {{"{evidence}", evidence},
                             {"{question}", query.text()}});
}

inline std::string render_checker_prompt(std::string_view evidence,
                                         const UserQuery& query) {
  return detail::substitute(kEvidenceCheckerPrompt,
                            {{"{evidence}", evidence},
                             {"{question}", query.text()}});
}

// Bullet list in the exact shape the generator prompt asks the model to
// echo back: "- [Title] URL" per line.
inline std::string format_link_list(const std::vector<LinkRef>& links) {
  std::string out;
  for (const auto& link : links) {
    if (!out.empty()) out.push_back('\n');
    out += "- [" + link.title + "] " + link.url;
  }
  return out;
}

inline std::string render_generator_prompt(
    const UserQuery& query, std::string_view evidence,
    const std::vector<LinkRef>& unanswered) {
  return detail::substitute(
      kAnswerGeneratorPrompt,
      {{"{question}", query.text()},
       {"{evidence}", evidence},
       {"{unanswered_question_list}", format_link_list(unanswered)}});
}

}  // namespace stackrag
