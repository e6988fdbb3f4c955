#include "s3/llm/rationales.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "s3/common/error.hpp"
#include "s3/common/text.hpp"

namespace s3::llm {

namespace {

// Returns the line body after a list marker, or nullopt if the line has none.
std::optional<std::string_view> strip_marker(std::string_view line) {
  if (line.empty()) return std::nullopt;
  if (line[0] == '-' || line[0] == '*') return line.substr(1);
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) return line.substr(i + 1);
  return std::nullopt;
}

std::string clean_phrase(std::string_view body) {
  std::string s = text::normalize_space(body);
  auto is_trailing = [](char c) { return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?'; };
  auto is_quote = [](char c) { return c == '"' || c == '\''; };
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (is_trailing(s.back()) || is_quote(s.back())) {
      s.pop_back();
      changed = true;
    }
    if (!s.empty() && is_quote(s.front())) {
      s.erase(s.begin());
      changed = true;
    }
  }
  return text::to_lower(text::trim(s));
}

}  // namespace

std::vector<std::string> parse_rationale_lines(std::string_view completion) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= completion.size()) {
    auto end = completion.find('\n', start);
    if (end == std::string_view::npos) end = completion.size();
    const auto line = text::trim(completion.substr(start, end - start));
    if (auto body = strip_marker(line)) {
      auto phrase = clean_phrase(*body);
      if (!phrase.empty()) out.push_back(std::move(phrase));
    }
    start = end + 1;
  }
  return out;
}

std::vector<std::string> top_k_rationales(Backend& backend, std::string_view label,
                                          const prompting::PromptTemplate& t, std::size_t k_total,
                                          const RationaleOptions& opts) {
  if (t.role != prompting::Role::ration) throw ConfigError("top_k_rationales needs the ration template");
  if (k_total == 0) throw ConfigError("K must be >= 1");
  if (opts.attempt_budget == 0) throw ConfigError("rationale attempt budget must be >= 1");

  prompting::Bindings b;
  b[std::string(prompting::key::x)] = std::to_string(opts.prompt_count.value_or(k_total));
  b[std::string(prompting::key::y)] = std::string(label);
  const auto prompt = prompting::render(t, b);

  std::vector<std::string> phrases;
  bool any_list = false;
  for (std::size_t attempt = 0; attempt < opts.attempt_budget && phrases.size() < k_total; ++attempt) {
    auto completions = generate(backend, make_request(prompt, opts.sampling, attempt));
    auto parsed = parse_rationale_lines(completions.front());
    any_list = any_list || !parsed.empty();
    for (auto& p : parsed) {
      if (phrases.size() == k_total) break;
      if (std::find(phrases.begin(), phrases.end(), p) == phrases.end()) phrases.push_back(std::move(p));
    }
  }
  if (!any_list) {
    throw BackendError(BackendErrorKind::unparseable,
                       "no list-structured rationales for label '" + std::string(label) + "' after " +
                           std::to_string(opts.attempt_budget) + " attempt(s)");
  }
  if (phrases.size() < k_total) {
    throw BackendError(BackendErrorKind::budget_exhausted,
                       "only " + std::to_string(phrases.size()) + " distinct rationales for label '" +
                           std::string(label) + "' after " + std::to_string(opts.attempt_budget) +
                           " attempt(s), need " + std::to_string(k_total));
  }
  return phrases;
}

}  // namespace s3::llm
