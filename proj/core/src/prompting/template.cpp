#include "s3/prompting/template.hpp"

#include <algorithm>
#include <fstream>

#include "s3/common/error.hpp"

namespace s3::prompting {

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::ration: return "ration";
    case Role::query1: return "query1";
    case Role::query2: return "query2";
    case Role::mis1: return "mis1";
    case Role::mis2: return "mis2";
  }
  return "query1";
}

Role role_from_string(std::string_view s) {
  for (Role r : {Role::ration, Role::query1, Role::query2, Role::mis1, Role::mis2}) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError("unknown template role '" + std::string(s) + "'");
}

const std::vector<std::string_view>& recognized_placeholders() {
  static const std::vector<std::string_view> keys{key::x,       key::y,          key::premise, key::question,
                                                  key::hypothesis, key::context, key::answer};
  return keys;
}

namespace {

struct Token {
  std::size_t pos;
  std::size_t len;
  std::string key;
};

// A placeholder is `<X>`, `<Y>` or `<X["field"]>`. Any other '<' is literal text.
std::vector<Token> scan(std::string_view body) {
  std::vector<Token> out;
  std::size_t i = 0;
  while ((i = body.find('<', i)) != std::string_view::npos) {
    auto rest = body.substr(i);
    if (rest.starts_with("<X>") || rest.starts_with("<Y>")) {
      out.push_back({i, 3, std::string(rest.substr(1, 1))});
      i += 3;
      continue;
    }
    if (rest.starts_with("<X[\"")) {
      auto close = rest.find("\"]>", 4);
      if (close != std::string_view::npos) {
        std::string k(rest.substr(1, close + 2 - 1));
        const auto& known = recognized_placeholders();
        if (std::find(known.begin(), known.end(), k) == known.end()) {
          throw ConfigError("unrecognized placeholder <" + k + ">");
        }
        out.push_back({i, close + 3, std::move(k)});
        i += close + 3;
        continue;
      }
    }
    ++i;
  }
  return out;
}

void append_literal(std::string& out, std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == 'n') {
      out.push_back('\n');
      i += 2;
    } else {
      out.push_back(s[i++]);
    }
  }
}

}  // namespace

std::vector<std::string> placeholders(std::string_view body) {
  std::vector<std::string> keys;
  for (auto& t : scan(body)) {
    if (std::find(keys.begin(), keys.end(), t.key) == keys.end()) keys.push_back(t.key);
  }
  return keys;
}

std::string render(const PromptTemplate& t, const Bindings& bindings, RenderOptions opts) {
  const auto tokens = scan(t.body);
  if (opts.strict) {
    for (const auto& [k, v] : bindings) {
      bool used = std::any_of(tokens.begin(), tokens.end(), [&](const Token& tok) { return tok.key == k; });
      if (!used) throw ConfigError("binding for unknown placeholder <" + k + ">");
    }
  }
  std::string out;
  out.reserve(t.body.size() + 64);
  std::size_t cursor = 0;
  for (const auto& tok : tokens) {
    append_literal(out, std::string_view(t.body).substr(cursor, tok.pos - cursor));
    auto it = bindings.find(tok.key);
    if (it == bindings.end()) throw ConfigError("unbound placeholder <" + tok.key + ">");
    if (tok.key == key::y) {
      auto mapped = t.label_map.find(it->second);
      out += mapped != t.label_map.end() ? mapped->second : it->second;
    } else {
      out += it->second;
    }
    cursor = tok.pos + tok.len;
  }
  append_literal(out, std::string_view(t.body).substr(cursor));
  return out;
}

BuiltinTemplates builtin_templates(std::string_view name) {
  BuiltinTemplates b;
  auto put = [&](Role r, std::string body, std::map<std::string, std::string> label_map = {}) {
    b.templates[r] = PromptTemplate{r, std::move(body), std::move(label_map)};
  };
  if (name == "imdb") {
    b.labels = {"positive", "negative"};
    put(Role::ration,
        "Imagine you are watching a movie; consider <X> reasons that may lead to <Y> impression of the movie.");
    put(Role::query1,
        "Now imagine that you just watched a movie that has <X>. Now you should write a <Y> review about this "
        "movie.");
    put(Role::mis1, R"(Write a <Y> movie similar to: \n <X>)");
  } else if (name == "qnli") {
    b.labels = {"entailment", "not_entailment"};
    std::map<std::string, std::string> words{{"entailment", "in"}, {"not_entailment", "not in"}};
    put(Role::query2,
        R"(Given an information paragraph: <X> \n Please ask a question that has answers <Y> the information paragraph)",
        words);
    put(Role::mis2,
        R"(Given a premise: <X["premise"]> \n And here is a question: <X["question"]> that the answer of question is <Y> the premise.\nPlease write another question similar to the given question and have answers <Y> the premise.)",
        words);
  } else if (name == "rte") {
    b.labels = {"entailment", "not_entailment"};
    std::map<std::string, std::string> words{{"entailment", "correct"}, {"not_entailment", "wrong"}};
    put(Role::query2, R"(<X> \nBased on the above description, the following sentence is definitely <Y>:)", words);
    put(Role::mis2,
        R"(<X["premise"]> \nBased on the above description, the following sentence: <X["Hypothesis"]> is definitely <Y>. Now write a sentence similar to the given sentence and is definitely <Y> based on the given description.)",
        words);
  } else if (name == "adqa") {
    put(Role::query2, R"(Given a context: <X["context"]> \n<X["answer"]> is the answer to the following question:)");
    put(Role::mis2,
        R"(Given a context: <X["context"]> \n<X["answer"]> is the answer to: <X["question"]>.\nA question that has the same answer in the context is:)");
  } else {
    throw ConfigError("unknown builtin template set '" + std::string(name) + "' (expected imdb, qnli, rte or adqa)");
  }
  return b;
}

TemplateSet templates_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("templates must be a JSON object of role -> {body, label_map}");
  TemplateSet out;
  for (const auto& [role_name, entry] : j.items()) {
    PromptTemplate t;
    t.role = role_from_string(role_name);
    if (entry.is_string()) {
      t.body = entry.get<std::string>();
    } else if (entry.is_object() && entry.contains("body") && entry["body"].is_string()) {
      t.body = entry["body"].get<std::string>();
      if (entry.contains("label_map")) {
        if (!entry["label_map"].is_object()) throw ConfigError("template '" + role_name + "': label_map must be an object");
        for (const auto& [k, v] : entry["label_map"].items()) {
          if (!v.is_string()) throw ConfigError("template '" + role_name + "': label_map values must be strings");
          t.label_map[k] = v.get<std::string>();
        }
      }
    } else {
      throw ConfigError("template '" + role_name + "' needs a string body");
    }
    placeholders(t.body);
    out[t.role] = std::move(t);
  }
  return out;
}

nlohmann::ordered_json to_json(const TemplateSet& set) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [role, t] : set) {
    nlohmann::ordered_json e;
    e["body"] = t.body;
    if (!t.label_map.empty()) {
      nlohmann::ordered_json m = nlohmann::ordered_json::object();
      for (const auto& [k, v] : t.label_map) m[k] = v;
      e["label_map"] = std::move(m);
    }
    j[std::string(to_string(role))] = std::move(e);
  }
  return j;
}

TemplateSet load_template_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return templates_from_json(j);
}

}  // namespace s3::prompting
