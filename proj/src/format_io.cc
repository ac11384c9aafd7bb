#include "bioqa/format_io.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "bioqa/error.h"
#include "bioqa/utf8.h"
#include "json.hpp"

namespace bioqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json ParseJson(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

std::string Where(std::string_view what, std::size_t index) {
  return std::string(what) + " " + std::to_string(index);
}

const json& Require(const json& object, const char* field,
                    const std::string& where) {
  if (!object.is_object()) {
    throw SchemaError(where + ": expected an object");
  }
  auto it = object.find(field);
  if (it == object.end()) {
    throw SchemaError(where + ": missing required field '" + field + "'");
  }
  return *it;
}

std::string RequireString(const json& object, const char* field,
                          const std::string& where) {
  const json& value = Require(object, field, where);
  if (!value.is_string()) {
    throw SchemaError(where + ": field '" + field + "' must be a string");
  }
  return value.get<std::string>();
}

std::string OptionalString(const json& object, const char* field) {
  auto it = object.find(field);
  if (it == object.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

// "yes", "Yes ", ["yes"] all map to true.
bool ParseYesNo(const json& value, const std::string& where) {
  const json* v = &value;
  if (v->is_array() && v->size() == 1) v = &(*v)[0];
  if (!v->is_string()) {
    throw SchemaError(where + ": yes/no answer must be \"yes\" or \"no\"");
  }
  std::string s = v->get<std::string>();
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          s.end());
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "yes") return true;
  if (s == "no") return false;
  throw SchemaError(where + ": yes/no answer must be \"yes\" or \"no\", got \"" +
                    v->get<std::string>() + "\"");
}

std::vector<std::string> StringList(const json& value,
                                    const std::string& where) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
    return out;
  }
  if (!value.is_array()) {
    throw SchemaError(where + ": expected a string or an array of strings");
  }
  for (const json& v : value) {
    if (!v.is_string()) {
      throw SchemaError(where + ": expected an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool IsListOfLists(const json& value) {
  return value.is_array() && !value.empty() &&
         std::all_of(value.begin(), value.end(),
                     [](const json& v) { return v.is_array(); });
}

GoldAnswer ParseGold(QuestionType type, const json& exact,
                     const std::string& where) {
  GoldAnswer gold;
  if (type == QuestionType::kYesNo) {
    gold.yes_label = ParseYesNo(exact, where);
    return gold;
  }
  if (type == QuestionType::kFactoid) {
    // Both [["a", "b"]] and ["a", "b"] list synonyms of the single answer.
    SynonymList synonyms;
    if (IsListOfLists(exact)) {
      for (const json& inner : exact) {
        for (std::string& s : StringList(inner, where)) {
          synonyms.push_back(std::move(s));
        }
      }
    } else {
      synonyms = StringList(exact, where);
    }
    gold.items.push_back(std::move(synonyms));
    return gold;
  }
  if (IsListOfLists(exact)) {
    for (const json& inner : exact) {
      gold.items.push_back(StringList(inner, where));
    }
  } else {
    for (std::string& s : StringList(exact, where)) {
      gold.items.push_back({std::move(s)});
    }
  }
  return gold;
}

std::optional<std::size_t> OptionalIndex(const json& object,
                                         const char* field) {
  auto it = object.find(field);
  if (it == object.end() || !it->is_number_integer()) return std::nullopt;
  const auto v = it->get<long long>();
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

Snippet ParseSnippet(const json& s, const std::string& where) {
  Snippet snippet;
  snippet.text = RequireString(s, "text", where);
  snippet.document_id = OptionalString(s, "document");
  const auto begin = OptionalIndex(s, "offsetInBeginSection");
  const auto end = OptionalIndex(s, "offsetInEndSection");
  const std::string begin_section = OptionalString(s, "beginSection");
  const std::string end_section = OptionalString(s, "endSection");
  const bool in_abstract =
      (begin_section.empty() || begin_section == "abstract") &&
      (end_section.empty() || end_section == "abstract");
  if (begin && end && in_abstract && *end > *begin) {
    snippet.source_offsets = CharRange{*begin, *end};
  }
  return snippet;
}

void ReadAbstracts(const json& holder, std::map<std::string, std::string>* out,
                   const std::string& where) {
  auto it = holder.find("abstracts");
  if (it == holder.end()) return;
  if (!it->is_object()) {
    throw SchemaError(where + ": 'abstracts' must be an object");
  }
  for (auto& [doc, text] : it->items()) {
    if (!text.is_string()) {
      throw SchemaError(where + ": abstract '" + doc + "' must be a string");
    }
    (*out)[doc] = text.get<std::string>();
  }
}

}  // namespace

ParsedBioasq ParseBioasq(std::string_view text) {
  const json root = ParseJson(text);
  const json& questions = Require(root, "questions", "document");
  if (!questions.is_array()) {
    throw SchemaError("document: 'questions' must be an array");
  }
  std::map<std::string, std::string> shared_abstracts;
  ReadAbstracts(root, &shared_abstracts, "document");

  ParsedBioasq out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const json& q = questions[i];
    const std::string where = Where("question", i);
    const std::string type_name = RequireString(q, "type", where);
    if (type_name == "summary") {
      ++out.summary_skipped;
      continue;
    }
    const auto type = ParseQuestionType(type_name);
    if (!type) {
      throw SchemaError(where + ": unknown question type '" + type_name + "'");
    }
    BioasqQuestion question;
    question.id = RequireString(q, "id", where);
    question.body = RequireString(q, "body", where);
    question.type = *type;
    question.gold = ParseGold(*type, Require(q, "exact_answer", where), where);
    if (auto it = q.find("snippets"); it != q.end()) {
      if (!it->is_array()) {
        throw SchemaError(where + ": 'snippets' must be an array");
      }
      for (std::size_t s = 0; s < it->size(); ++s) {
        question.snippets.push_back(
            ParseSnippet((*it)[s], where + " snippet " + std::to_string(s)));
      }
    }
    question.abstracts = shared_abstracts;
    ReadAbstracts(q, &question.abstracts, where);
    out.questions.push_back(std::move(question));
  }
  return out;
}

std::string WriteBioasq(std::span<const BioasqQuestion> questions) {
  ordered_json list = ordered_json::array();
  for (const BioasqQuestion& q : questions) {
    ordered_json entry;
    entry["id"] = q.id;
    entry["body"] = q.body;
    entry["type"] = std::string(QuestionTypeName(q.type));
    if (q.type == QuestionType::kYesNo) {
      entry["exact_answer"] = q.gold.yes_label.value_or(false) ? "yes" : "no";
    } else {
      ordered_json items = ordered_json::array();
      for (const SynonymList& item : q.gold.items) items.push_back(item);
      entry["exact_answer"] = std::move(items);
    }
    ordered_json snippets = ordered_json::array();
    for (const Snippet& s : q.snippets) {
      ordered_json js;
      js["text"] = s.text;
      js["document"] = s.document_id;
      if (s.source_offsets) {
        js["offsetInBeginSection"] = s.source_offsets->begin;
        js["offsetInEndSection"] = s.source_offsets->end;
        js["beginSection"] = "abstract";
        js["endSection"] = "abstract";
      }
      snippets.push_back(std::move(js));
    }
    entry["snippets"] = std::move(snippets);
    if (!q.abstracts.empty()) {
      ordered_json abstracts = ordered_json::object();
      for (const auto& [doc, body] : q.abstracts) abstracts[doc] = body;
      entry["abstracts"] = std::move(abstracts);
    }
    list.push_back(std::move(entry));
  }
  ordered_json root;
  root["questions"] = std::move(list);
  return root.dump() + "\n";
}

ParsedSquad ParseSquad(std::string_view text) {
  const json root = ParseJson(text);
  ParsedSquad out;
  if (auto it = root.find("version"); it != root.end() && it->is_string()) {
    out.dataset.version = it->get<std::string>();
  }
  const json& data = Require(root, "data", "document");
  if (!data.is_array()) throw SchemaError("document: 'data' must be an array");

  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string where_a = Where("article", a);
    SquadArticle article;
    article.title = OptionalString(data[a], "title");
    const json& paragraphs = Require(data[a], "paragraphs", where_a);
    if (!paragraphs.is_array()) {
      throw SchemaError(where_a + ": 'paragraphs' must be an array");
    }
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string where_p = where_a + " paragraph " + std::to_string(p);
      SquadParagraph paragraph;
      paragraph.context = RequireString(paragraphs[p], "context", where_p);
      const std::u32string context = utf8::Decode(paragraph.context);
      const json& qas = Require(paragraphs[p], "qas", where_p);
      if (!qas.is_array()) {
        throw SchemaError(where_p + ": 'qas' must be an array");
      }
      for (std::size_t k = 0; k < qas.size(); ++k) {
        const std::string where_q = where_p + " qa " + std::to_string(k);
        SquadInstance instance;
        instance.id = RequireString(qas[k], "id", where_q);
        instance.question = RequireString(qas[k], "question", where_q);
        instance.context = paragraph.context;
        const json& answers = Require(qas[k], "answers", where_q);
        if (!answers.is_array()) {
          throw SchemaError(where_q + ": 'answers' must be an array");
        }
        bool valid = true;
        for (const json& ans : answers) {
          AnswerSpan span;
          span.text = RequireString(ans, "text", where_q);
          const json& start = Require(ans, "answer_start", where_q);
          if (!start.is_number_integer()) {
            throw SchemaError(where_q + ": 'answer_start' must be an integer");
          }
          if (start.get<long long>() < 0) {
            throw SchemaError(where_q + ": negative 'answer_start' (" +
                              std::to_string(start.get<long long>()) + ")");
          }
          span.start_char = start.get<std::size_t>();
          span.end_char = span.start_char + utf8::Length(span.text);
          valid = valid && SpanMatchesContext(context, span);
          instance.answers.push_back(std::move(span));
        }
        if (!valid) out.flagged_ids.push_back(instance.id);
        paragraph.qas.push_back(std::move(instance));
      }
      article.paragraphs.push_back(std::move(paragraph));
    }
    out.dataset.articles.push_back(std::move(article));
  }
  return out;
}

std::string WriteSquad(const SquadDataset& dataset) {
  ordered_json root;
  root["version"] = dataset.version;
  ordered_json data = ordered_json::array();
  for (const SquadArticle& article : dataset.articles) {
    ordered_json ja;
    ja["title"] = article.title;
    ordered_json paragraphs = ordered_json::array();
    for (const SquadParagraph& paragraph : article.paragraphs) {
      ordered_json jp;
      jp["context"] = paragraph.context;
      ordered_json qas = ordered_json::array();
      for (const SquadInstance& qa : paragraph.qas) {
        ordered_json jq;
        jq["id"] = qa.id;
        jq["question"] = qa.question;
        ordered_json answers = ordered_json::array();
        for (const AnswerSpan& span : qa.answers) {
          ordered_json js;
          js["text"] = span.text;
          js["answer_start"] = span.start_char;
          answers.push_back(std::move(js));
        }
        jq["answers"] = std::move(answers);
        qas.push_back(std::move(jq));
      }
      jp["qas"] = std::move(qas);
      paragraphs.push_back(std::move(jp));
    }
    ja["paragraphs"] = std::move(paragraphs);
    data.push_back(std::move(ja));
  }
  root["data"] = std::move(data);
  return root.dump() + "\n";
}

namespace {

// A candidate is either "a" or ["a", synonyms...]; the first form wins.
std::vector<std::string> Candidates(const json& value,
                                    const std::string& where) {
  if (value.is_string()) return {value.get<std::string>()};
  if (!value.is_array()) {
    throw SchemaError(where + ": expected an array of answers");
  }
  std::vector<std::string> out;
  for (const json& v : value) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_array() && !v.empty() && v[0].is_string()) {
      out.push_back(v[0].get<std::string>());
    } else {
      throw SchemaError(where + ": answers must be strings or string lists");
    }
  }
  return out;
}

void AddPrediction(PredictionFile* out, const std::string& id,
                   QuestionType type, const json& value) {
  const std::string where = "prediction '" + id + "'";
  if (out->yesno.contains(id) || out->factoid.contains(id) ||
      out->list.contains(id)) {
    throw SchemaError(where + ": duplicate question id");
  }
  switch (type) {
    case QuestionType::kYesNo:
      out->yesno[id] = ParseYesNo(value, where);
      break;
    case QuestionType::kFactoid: {
      auto ranked = Candidates(value, where);
      if (ranked.size() > kMaxFactoidCandidates) {
        throw SchemaError(where + ": " + std::to_string(ranked.size()) +
                          " factoid candidates, BioASQ allows at most " +
                          std::to_string(kMaxFactoidCandidates));
      }
      out->factoid[id] = std::move(ranked);
      break;
    }
    case QuestionType::kList:
      out->list[id] = Candidates(value, where);
      break;
  }
}

QuestionType ResolveType(const std::string& id, const json& value,
                         const std::map<std::string, QuestionType>* types) {
  if (types != nullptr) {
    auto it = types->find(id);
    if (it != types->end()) return it->second;
  }
  if (value.is_string()) return QuestionType::kYesNo;
  if (types == nullptr) {
    throw SchemaError("prediction '" + id +
                      "': cannot tell factoid from list without a type");
  }
  throw DataMismatch("prediction id '" + id + "' is not in the golden file");
}

}  // namespace

PredictionFile ParsePredictions(
    std::string_view text, const std::map<std::string, QuestionType>* types) {
  const json root = ParseJson(text);
  if (!root.is_object()) {
    throw SchemaError("predictions: top level must be an object");
  }
  PredictionFile out;

  static const std::set<std::string> kGroups = {"yesno", "factoid", "list"};
  const bool grouped =
      !root.empty() && std::all_of(root.items().begin(), root.items().end(),
                                   [](const auto& kv) {
                                     return kGroups.contains(kv.key()) &&
                                            kv.value().is_object();
                                   });
  if (grouped) {
    for (auto& [group, entries] : root.items()) {
      const QuestionType type = *ParseQuestionType(group);
      for (auto& [id, value] : entries.items()) {
        AddPrediction(&out, id, type, value);
      }
    }
    return out;
  }

  if (auto it = root.find("questions"); it != root.end() && it->is_array()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& q = (*it)[i];
      const std::string where = Where("prediction", i);
      const std::string id = RequireString(q, "id", where);
      const json& value = Require(q, "exact_answer", where);
      QuestionType type;
      if (auto t = q.find("type"); t != q.end() && t->is_string()) {
        auto parsed = ParseQuestionType(t->get<std::string>());
        if (!parsed) {
          throw SchemaError(where + ": unknown type '" +
                            t->get<std::string>() + "'");
        }
        type = *parsed;
      } else {
        type = ResolveType(id, value, types);
      }
      AddPrediction(&out, id, type, value);
    }
    return out;
  }

  for (auto& [id, value] : root.items()) {
    AddPrediction(&out, id, ResolveType(id, value, types), value);
  }
  return out;
}

std::string WritePredictions(const PredictionFile& predictions) {
  ordered_json root;
  ordered_json yesno = ordered_json::object();
  for (const auto& [id, yes] : predictions.yesno) yesno[id] = yes ? "yes" : "no";
  ordered_json factoid = ordered_json::object();
  for (const auto& [id, ranked] : predictions.factoid) factoid[id] = ranked;
  ordered_json list = ordered_json::object();
  for (const auto& [id, answers] : predictions.list) list[id] = answers;
  root["yesno"] = std::move(yesno);
  root["factoid"] = std::move(factoid);
  root["list"] = std::move(list);
  return root.dump() + "\n";
}

std::vector<SquadInstance> FlattenInstances(const SquadDataset& dataset) {
  std::vector<SquadInstance> out;
  for (const SquadArticle& article : dataset.articles) {
    for (const SquadParagraph& paragraph : article.paragraphs) {
      out.insert(out.end(), paragraph.qas.begin(), paragraph.qas.end());
    }
  }
  return out;
}

SquadDataset PackInstances(std::span<const SquadInstance> instances,
                           std::span<const std::string> titles) {
  if (titles.size() != instances.size()) {
    throw InvalidArgument("PackInstances: one title per instance required");
  }
  SquadDataset dataset;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (dataset.articles.empty() || i == 0 || titles[i] != titles[i - 1]) {
      dataset.articles.push_back({titles[i], {}});
    }
    auto& paragraphs = dataset.articles.back().paragraphs;
    if (paragraphs.empty() || paragraphs.back().context != instances[i].context) {
      paragraphs.push_back({instances[i].context, {}});
    }
    paragraphs.back().qas.push_back(instances[i]);
  }
  return dataset;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace bioqa
