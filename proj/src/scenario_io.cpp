#include "abstain/scenario_io.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace abstain {

namespace {

[[noreturn]] void fail(long line, const std::string& msg) {
  throw std::invalid_argument("scenario file, line " + std::to_string(line) +
                              ": " + msg);
}

using Value = std::variant<double, std::string, std::vector<double>>;
using KeyValues = std::map<std::string, std::pair<Value, long>>;  // value, line

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    else if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double parse_number(const std::string& s, long line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) fail(line, "trailing characters after number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "expected a number, got '" + s + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range: '" + s + "'");
  }
}

Value parse_value(const std::string& raw, long line) {
  if (raw.empty()) fail(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      fail(line, "unterminated string");
    return raw.substr(1, raw.size() - 2);
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated array");
    std::vector<double> vals;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(line, "empty array element");
      vals.push_back(parse_number(item, line));
    }
    return vals;
  }
  return parse_number(raw, line);
}

struct ParsedFile {
  std::map<std::string, KeyValues> sections;
  KeyValues top;  // keys before any section header
};

ParsedFile parse_raw(const std::string& text) {
  ParsedFile out;
  std::stringstream in(text);
  std::string line;
  std::string current;  // "" means top level
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line_no, "unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (current.empty()) fail(line_no, "empty section name");
      for (char c : current)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
          fail(line_no, "bad section name '" + current + "'");
      if (out.sections.count(current))
        fail(line_no, "duplicate section '" + current + "'");
      out.sections[current];  // create
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    for (char c : key)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        fail(line_no, "bad key '" + key + "'");
    KeyValues& kv = current.empty() ? out.top : out.sections[current];
    if (kv.count(key)) fail(line_no, "duplicate key '" + key + "'");
    kv[key] = {parse_value(val, line_no), line_no};
  }
  return out;
}

class SectionReader {
public:
  SectionReader(std::string name, KeyValues kv)
      : name_(std::move(name)), kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  template <typename T>
  T take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end())
      throw std::invalid_argument("scenario file: [" + name_ +
                                  "] is missing key '" + key + "'");
    const T* v = std::get_if<T>(&it->second.first);
    if (!v) fail(it->second.second, "key '" + key + "' has the wrong type");
    T out = *v;
    kv_.erase(it);
    return out;
  }

  void finish() const {
    if (kv_.empty()) return;
    const auto& it = *kv_.begin();
    fail(it.second.second,
         "unknown key '" + it.first + "' in section [" + name_ + "]");
  }

private:
  std::string name_;
  KeyValues kv_;
};

Density1D simple_density_from(SectionReader& r, const std::string& family,
                              const std::string& section) {
  if (family == "exponential") return Density1D::exponential(r.take<double>("rate"));
  if (family == "gaussian")
    return Density1D::gaussian(r.take<double>("mean"), r.take<double>("std"));
  if (family == "uniform")
    return Density1D::uniform(r.take<double>("lo"), r.take<double>("hi"));
  if (family == "tabulated")
    return Density1D::tabulated(r.take<std::vector<double>>("grid"),
                                r.take<std::vector<double>>("pdf"));
  throw std::invalid_argument("scenario file: [" + section +
                              "] has unknown family '" + family + "'");
}

Density1D density_section(const std::string& name, ParsedFile& file) {
  auto it = file.sections.find(name);
  if (it == file.sections.end())
    throw std::invalid_argument("scenario file: missing section [" + name + "]");
  SectionReader r(name, std::move(it->second));
  file.sections.erase(it);
  std::string family = r.take<std::string>("family");

  if (family != "mixture") {
    Density1D d = simple_density_from(r, family, name);
    r.finish();
    return d;
  }

  r.finish();  // mixture sections carry only the family key ...
  std::vector<std::pair<double, Density1D>> components;
  for (int idx = 1;; ++idx) {
    std::string sub = name + ".component" + std::to_string(idx);
    auto sit = file.sections.find(sub);
    if (sit == file.sections.end()) break;
    SectionReader cr(sub, std::move(sit->second));
    file.sections.erase(sit);
    double weight = cr.take<double>("weight");
    std::string cfam = cr.take<std::string>("family");
    if (cfam == "mixture")
      throw std::invalid_argument("scenario file: nested mixtures not supported");
    Density1D d = simple_density_from(cr, cfam, sub);
    cr.finish();
    components.emplace_back(weight, d);
  }
  if (components.empty())
    throw std::invalid_argument("scenario file: [" + name +
                                "] mixture needs [" + name + ".component1]");
  return Density1D::mixture(std::move(components));
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  ParsedFile file = parse_raw(text);

  SectionReader top("", std::move(file.top));
  double schema = top.take<double>("schema");
  if (schema != 1.0)
    throw std::invalid_argument("scenario file: unsupported schema version");
  top.finish();

  Density1D f0 = density_section("f0", file);
  Density1D f1 = density_section("f1", file);
  Density1D f0a = density_section("f0_adv", file);
  Density1D f1a = density_section("f1_adv", file);

  auto pit = file.sections.find("priors");
  if (pit == file.sections.end())
    throw std::invalid_argument("scenario file: missing section [priors]");
  SectionReader pr("priors", std::move(pit->second));
  file.sections.erase(pit);
  double p0 = pr.take<double>("p0");
  double p1 = pr.take<double>("p1");
  pr.finish();

  auto cit = file.sections.find("classifier");
  if (cit == file.sections.end())
    throw std::invalid_argument("scenario file: missing section [classifier]");
  SectionReader cr("classifier", std::move(cit->second));
  file.sections.erase(cit);
  std::vector<double> y = cr.take<std::vector<double>>("y");
  std::vector<double> gamma(2 * y.size(), 0.0);
  if (cr.has("gamma")) gamma = cr.take<std::vector<double>>("gamma");
  cr.finish();

  if (!file.sections.empty())
    throw std::invalid_argument("scenario file: unknown section [" +
                                file.sections.begin()->first + "]");

  ScenarioConfig cfg{Scenario(f0, f1, f0a, f1a, p0, p1), std::move(y),
                     std::move(gamma)};
  cfg.classifier();  // validate geometry eagerly
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace abstain
