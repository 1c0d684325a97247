#include "occtune/pruner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "occtune/error.hpp"
#include "text.hpp"

namespace occtune {

namespace {

std::vector<int> int_range(int start, int stop, int step) {
  std::vector<int> out;
  for (int v = start; step > 0 ? v < stop : v > stop; v += step) out.push_back(v);
  return out;
}

template <typename T>
void check_list(const std::vector<T>& values, const char* name) {
  if (values.empty()) {
    throw Error(ErrorKind::Invariant, std::string(name) + " must not be empty", 0, name);
  }
  std::set<T> seen(values.begin(), values.end());
  if (seen.size() != values.size()) {
    throw Error(ErrorKind::Invariant, std::string(name) + " contains duplicate values", 0, name);
  }
}

}  // namespace

TuningSpace TuningSpace::defaults() {
  TuningSpace s;
  s.tc = int_range(32, 1025, 32);
  s.bc = int_range(24, 193, 24);
  s.uif = int_range(1, 6, 1);
  s.pl = {16, 48};
  s.cflags = {"", "-use_fast_math"};
  return s;
}

void TuningSpace::validate() const {
  check_list(tc, "TC");
  check_list(bc, "BC");
  check_list(uif, "UIF");
  check_list(pl, "PL");
  check_list(cflags, "CFLAGS");
  if (!sc.empty()) check_list(sc, "SC");
  for (int t : tc) {
    if (t <= 0 || t % 32 != 0) {
      throw Error(ErrorKind::Invariant,
                  "TC value " + std::to_string(t) + " is not a positive multiple of 32", 0, "TC");
    }
  }
}

std::int64_t grid_size(const TuningSpace& s) {
  std::int64_t n = static_cast<std::int64_t>(s.tc.size()) * static_cast<std::int64_t>(s.bc.size()) *
                   static_cast<std::int64_t>(s.uif.size()) * static_cast<std::int64_t>(s.pl.size()) *
                   static_cast<std::int64_t>(s.cflags.size());
  if (!s.sc.empty()) n *= static_cast<std::int64_t>(s.sc.size());
  return n;
}

// ---------------------------------------------------------------------------
// Tuning-space text format

namespace {

using Value = std::variant<std::int64_t, std::string>;

class ExprParser {
 public:
  ExprParser(std::string_view s, int line) : s_(s), line_(line) {}

  std::vector<Value> parse() {
    skip_ws();
    std::vector<Value> out;
    if (consume("range")) {
      skip_ws();
      expect('(');
      std::vector<std::int64_t> args;
      while (true) {
        skip_ws();
        args.push_back(integer());
        skip_ws();
        if (consume(")")) break;
        expect(',');
      }
      if (args.size() > 3) fail("range() takes at most three arguments");
      std::int64_t start = 0, stop = 0, step = 1;
      if (args.size() == 1) {
        stop = args[0];
      } else {
        start = args[0];
        stop = args[1];
        if (args.size() == 3) step = args[2];
      }
      if (step == 0) fail("range() step must not be zero");
      for (auto v = start; step > 0 ? v < stop : v > stop; v += step) {
        out.emplace_back(v);
        if (out.size() > 1'000'000) fail("range() too large");
      }
    } else if (consume("[")) {
      skip_ws();
      if (!consume("]")) {
        while (true) {
          skip_ws();
          out.push_back(item());
          skip_ws();
          if (consume("]")) break;
          expect(',');
        }
      }
    } else {
      fail("expected range(...) or [...]");
    }
    skip_ws();
    consume(";");
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw Error(ErrorKind::Parse, why, line_); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool consume(std::string_view tok) {
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::int64_t integer() {
    const auto start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    const auto v = text::parse_int(s_.substr(start, pos_ - start));
    if (!v) fail("expected an integer");
    if (*v < -1'000'000'000 || *v > 1'000'000'000) fail("integer out of range");
    return *v;
  }
  Value item() {
    if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"')) {
      const char quote = s_[pos_++];
      const auto close = s_.find(quote, pos_);
      if (close == std::string_view::npos) fail("unterminated string");
      std::string str(s_.substr(pos_, close - pos_));
      pos_ = close + 1;
      return str;
    }
    return integer();
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

// Drops a '#' comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<int> as_ints(const std::vector<Value>& values, const std::string& name, int line) {
  std::vector<int> out;
  for (const auto& v : values) {
    if (!std::holds_alternative<std::int64_t>(v)) {
      throw Error(ErrorKind::Parse, name + " takes integer values", line);
    }
    out.push_back(static_cast<int>(std::get<std::int64_t>(v)));
  }
  return out;
}

}  // namespace

TuningSpace parse_tuning_space(std::string_view input) {
  auto space = TuningSpace::defaults();
  std::set<std::string> seen;
  int line_no = 0;

  for (const auto raw : text::lines(input)) {
    ++line_no;
    const auto line = text::trim(strip_comment(raw));
    if (line.empty() || line == "}" || line == "{") continue;
    if (line.rfind("def ", 0) == 0 && line.back() == '{') continue;  // def performance_params {

    if (line.rfind("param", 0) != 0) {
      throw Error(ErrorKind::Parse, "expected 'param NAME[] = ...'", line_no);
    }
    auto rest = text::trim(line.substr(5));
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Parse, "missing '='", line_no);
    auto name = text::trim(rest.substr(0, eq));
    if (name.size() > 2 && name.substr(name.size() - 2) == "[]") {
      name = text::trim(name.substr(0, name.size() - 2));
    }
    const std::string key(name);
    if (!seen.insert(key).second) {
      throw Error(ErrorKind::Parse, "parameter " + key + " defined twice", line_no);
    }
    const auto values = ExprParser(rest.substr(eq + 1), line_no).parse();

    if (key == "TC") {
      space.tc = as_ints(values, key, line_no);
    } else if (key == "BC") {
      space.bc = as_ints(values, key, line_no);
    } else if (key == "UIF") {
      space.uif = as_ints(values, key, line_no);
    } else if (key == "PL") {
      space.pl = as_ints(values, key, line_no);
    } else if (key == "SC") {
      space.sc = as_ints(values, key, line_no);
    } else if (key == "CFLAGS") {
      space.cflags.clear();
      for (const auto& v : values) {
        if (!std::holds_alternative<std::string>(v)) {
          throw Error(ErrorKind::Parse, "CFLAGS takes quoted string values", line_no);
        }
        space.cflags.push_back(std::get<std::string>(v));
      }
    } else {
      throw Error(ErrorKind::Parse, "unknown parameter '" + key + "'", line_no);
    }
  }
  space.validate();
  return space;
}

TuningSpace load_tuning_space(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open tuning space '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_tuning_space(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what(), 0, e.field());
  }
}

std::string to_spec_text(const TuningSpace& space) {
  std::ostringstream out;
  const auto ints = [&](const char* name, const std::vector<int>& v) {
    out << "param " << name << "[] = [";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << "];\n";
  };
  ints("TC", space.tc);
  ints("BC", space.bc);
  ints("UIF", space.uif);
  ints("PL", space.pl);
  if (!space.sc.empty()) ints("SC", space.sc);
  out << "param CFLAGS[] = [";
  for (std::size_t i = 0; i < space.cflags.size(); ++i) {
    const auto& f = space.cflags[i];
    const char q = f.find('\'') == std::string::npos ? '\'' : '"';
    out << (i ? ", " : "") << q << f << q;
  }
  out << "];\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Pruning

std::string_view to_string(PruneRule rule) {
  return rule == PruneRule::StaticOnly ? "static" : "static+intensity";
}

namespace {

PruneReport finish(const TuningSpace& space, std::vector<int> kept, PruneRule rule) {
  PruneReport r;
  r.rule = rule;
  r.original_size = grid_size(space);
  r.kept_tc = std::move(kept);
  auto pruned = space;
  pruned.tc = r.kept_tc;
  r.pruned_size = grid_size(pruned);
  r.reduction = 1.0 - static_cast<double>(r.pruned_size) / static_cast<double>(r.original_size);
  return r;
}

}  // namespace

PruneReport static_prune(const TuningSpace& space, const SuggestionReport& suggestion) {
  space.validate();
  const auto& cands = suggestion.thread_candidates;
  std::vector<int> kept;
  for (int t : space.tc) {
    if (std::find(cands.begin(), cands.end(), t) != cands.end()) kept.push_back(t);
  }
  if (kept.empty()) {
    throw Error(ErrorKind::NoCandidates, "no suggested thread count appears in TC");
  }
  return finish(space, std::move(kept), PruneRule::StaticOnly);
}

PruneReport rule_prune(const TuningSpace& space, const SuggestionReport& suggestion,
                       double mix_intensity, double threshold) {
  auto kept = static_prune(space, suggestion).kept_tc;
  std::sort(kept.begin(), kept.end());
  const auto half = (kept.size() + 1) / 2;
  if (mix_intensity > threshold) {
    kept.erase(kept.begin(), kept.end() - static_cast<std::ptrdiff_t>(half));
  } else {
    kept.resize(half);
  }
  auto r = finish(space, std::move(kept), PruneRule::StaticPlusIntensity);
  r.intensity = mix_intensity;
  r.threshold = threshold;
  return r;
}

TuningSpace apply(const TuningSpace& space, const PruneReport& report) {
  auto out = space;
  out.tc = report.kept_tc;
  return out;
}

Variant VariantRange::iterator::operator*() const {
  const auto& s = *space_;
  auto i = index_;
  Variant v;
  if (!s.sc.empty()) {
    const auto n = static_cast<std::int64_t>(s.sc.size());
    v.sc = s.sc[static_cast<std::size_t>(i % n)];
    i /= n;
  }
  const auto pick = [&i](const auto& list) -> const auto& {
    const auto n = static_cast<std::int64_t>(list.size());
    const auto& value = list[static_cast<std::size_t>(i % n)];
    i /= n;
    return value;
  };
  v.cflags = pick(s.cflags);
  v.pl = pick(s.pl);
  v.uif = pick(s.uif);
  v.bc = pick(s.bc);
  v.tc = pick(s.tc);
  return v;
}

VariantRange enumerate(const TuningSpace& space) {
  space.validate();
  return VariantRange(space);
}

}  // namespace occtune
