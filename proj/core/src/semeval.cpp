#include "sag/semeval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

namespace sag {

namespace {

std::string decode_entities(const std::string& s) {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"&lt;", "<"},  {"&gt;", ">"},   {"&quot;", "\""},
      {"&apos;", "'"}, {"&#39;", "'"}, {"&amp;", "&"}};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '&') {
      bool matched = false;
      for (const auto& [ent, rep] : table) {
        if (s.compare(i, ent.size(), ent) == 0) {
          out += rep;
          i += ent.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out += s[i++];
  }
  return out;
}

// Collapses whitespace runs (incl. newlines/tabs, which the TSV cannot carry).
std::string normalize_ws(const std::string& s) {
  std::string out;
  bool in_ws = true;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!in_ws) out += ' ';
      in_ws = true;
    } else {
      out += ch;
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

struct Element {
  std::string attrs;  // raw text inside the opening tag
  std::string body;   // text between the tags
  std::size_t end = std::string::npos;  // position just past the closing tag
};

// Finds the next <tag ...>body</tag> at or after `from`. Assumes the
// element is not nested inside another element of the same name, which
// holds for this format.
std::optional<Element> next_element(const std::string& xml,
                                    const std::string& tag, std::size_t from) {
  const std::string open = "<" + tag;
  std::size_t pos = from;
  while (true) {
    pos = xml.find(open, pos);
    if (pos == std::string::npos) return std::nullopt;
    const char after = pos + open.size() < xml.size() ? xml[pos + open.size()]
                                                      : '\0';
    if (after == ' ' || after == '>' || after == '\t' || after == '\n' ||
        after == '\r' || after == '/') {
      break;
    }
    pos += open.size();  // prefix of a longer tag name, keep looking
  }
  const std::size_t tag_close = xml.find('>', pos);
  if (tag_close == std::string::npos) {
    throw ParseError("unterminated <" + tag + "> tag");
  }
  Element el;
  el.attrs = xml.substr(pos + open.size(), tag_close - pos - open.size());
  if (!el.attrs.empty() && el.attrs.back() == '/') {  // self-closing
    el.end = tag_close + 1;
    return el;
  }
  const std::string close = "</" + tag + ">";
  const std::size_t body_end = xml.find(close, tag_close + 1);
  if (body_end == std::string::npos) {
    throw ParseError("missing " + close);
  }
  el.body = xml.substr(tag_close + 1, body_end - tag_close - 1);
  el.end = body_end + close.size();
  return el;
}

std::optional<std::string> attribute(const std::string& attrs,
                                     const std::string& name) {
  const std::string key = name + "=\"";
  std::size_t pos = 0;
  while (true) {
    pos = attrs.find(key, pos);
    if (pos == std::string::npos) return std::nullopt;
    if (pos == 0 || attrs[pos - 1] == ' ' || attrs[pos - 1] == '\t' ||
        attrs[pos - 1] == '\n') {
      break;
    }
    pos += key.size();
  }
  const std::size_t start = pos + key.size();
  const std::size_t end = attrs.find('"', start);
  if (end == std::string::npos) {
    throw ParseError("unterminated attribute value for \"" + name + "\"");
  }
  return decode_entities(attrs.substr(start, end - start));
}

std::string collapse_label(const std::string& accuracy,
                           const LabelScheme& scheme) {
  // The source annotation is 5-way; coarser schemes merge classes.
  std::string canonical = accuracy;
  if (canonical == "partially_correct_incomplete") {
    canonical = "partially_correct";
  }
  if (scheme.name == "5way") return canonical;
  if (scheme.name == "3way") {
    if (canonical == "correct" || canonical == "contradictory") {
      return canonical;
    }
    return "incorrect";
  }
  if (scheme.name == "2way") {
    return canonical == "correct" ? "correct" : "incorrect";
  }
  throw ConfigError("cannot derive scheme \"" + scheme.name +
                    "\" from 5-way source labels");
}

}  // namespace

std::vector<Sample> parse_semeval_xml(const std::string& path,
                                      const LabelScheme& scheme) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open XML file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string xml = buf.str();

  auto question = next_element(xml, "question", 0);
  if (!question) throw ParseError(path + ": no <question> element");

  auto qid = attribute(question->attrs, "id");
  if (!qid || qid->empty()) {
    throw ParseError(path + ": <question> lacks an id attribute");
  }
  const std::size_t dash = qid->find('-');
  const std::string domain = dash == std::string::npos ? *qid
                                                       : qid->substr(0, dash);

  std::string question_text;
  if (auto qt = next_element(question->body, "questionText", 0)) {
    question_text = normalize_ws(decode_entities(qt->body));
  }

  auto ref = next_element(question->body, "referenceAnswer", 0);
  if (!ref) throw ParseError(path + ": no <referenceAnswer>");
  const std::string reference = normalize_ws(decode_entities(ref->body));
  if (reference.empty()) {
    throw ParseError(path + ": empty reference answer");
  }

  std::vector<Sample> samples;
  std::size_t pos = 0;
  while (auto ans = next_element(question->body, "studentAnswer", pos)) {
    pos = ans->end;
    auto accuracy = attribute(ans->attrs, "accuracy");
    if (!accuracy) {
      throw ParseError(path + ": <studentAnswer> lacks an accuracy attribute");
    }
    const std::string label = collapse_label(*accuracy, scheme);
    if (scheme.index_of(label) < 0) {
      throw ParseError(path + ": unmappable accuracy \"" + *accuracy + "\"");
    }
    std::string student = normalize_ws(decode_entities(ans->body));
    // A blank answer is still a graded (incorrect) response; keep it with a
    // placeholder so downstream tokenization has something to chew on.
    if (student.empty()) student = "unanswered";

    Sample s;
    s.domain = domain;
    s.question_id = *qid;
    s.question = question_text;
    s.reference = reference;
    s.student = student;
    s.label = scheme.index_of(label);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) {
    throw ParseError(path + ": no <studentAnswer> elements");
  }
  return samples;
}

std::size_t convert_semeval_dir(const std::string& xml_dir,
                                const std::string& out_tsv,
                                const LabelScheme& scheme) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(xml_dir)) {
    throw DataError("not a directory: " + xml_dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(xml_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .xml files under " + xml_dir);

  std::vector<Sample> all;
  for (const auto& f : files) {
    auto samples = parse_semeval_xml(f.string(), scheme);
    all.insert(all.end(), samples.begin(), samples.end());
  }
  write_samples(out_tsv, all, scheme);
  return all.size();
}

}  // namespace sag
