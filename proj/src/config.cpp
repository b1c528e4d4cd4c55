#include "wave/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace wave {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"potential", {"variant", "alpha", "beta", "well_b", "terms", "box_lo", "box_hi"}},
      {"grid", {"x_left", "x_right", "h", "refinement", "ratio", "h_max"}},
      {"solver",
       {"opt_tol", "feas_tol", "penalty_kappa", "max_iters", "restarts", "perturbation", "seed", "armijo_c1",
        "shrink", "proj_tol"}},
      {"bounds", {"c"}},
      {"gamma", {"c", "c_list", "warm_start"}},
      {"speed", {"c_tol", "expansion", "max_expansions", "warm_start", "gamma_zero_scale"}},
      {"verify", {"c", "profile", "gamma_hat"}},
      {"output", {"directory", "report"}},
  };
  return s;
}

class Reader {
 public:
  Reader(std::map<std::string, Section>& sections, std::string path) : sections_(sections), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    std::string where = path_;
    auto s = sections_.find(section);
    if (s != sections_.end()) {
      auto e = s->second.find(key);
      if (e != s->second.end()) where += ":" + std::to_string(e->second.line);
    }
    throw Error(ErrorKind::config_error, where + ": [" + section + "] " + key + ": " + msg);
  }

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  double to_double(const std::string& section, const std::string& key, const std::string& text) {
    double v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) fail(section, key, "not a number: '" + text + "'");
    if (!std::isfinite(v)) fail(section, key, "must be finite");
    return v;
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return to_double(section, key, e->value);
  }

  std::optional<long> integer(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    long v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || e->value.empty()) fail(section, key, "not an integer: '" + e->value + "'");
    return v;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(section, key, "expected true or false, got '" + e->value + "'");
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<std::vector<double>> list(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    if (trim(e->value).empty()) return out;
    for (const auto& item : split(e->value, ',')) out.push_back(to_double(section, key, item));
    return out;
  }

  void positive(const std::string& section, const std::string& key, double v) {
    if (!(v > 0)) fail(section, key, "must be positive (got " + format(v) + ")");
  }

  void open_unit(const std::string& section, const std::string& key, double v) {
    if (!(v > 0 && v < 1)) fail(section, key, "must lie in (0, 1) (got " + format(v) + ")");
  }

  static std::string format(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  }

 private:
  std::map<std::string, Section>& sections_;
  std::string path_;
};

Point<double> to_point(const std::vector<double>& v) {
  Point<double> p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& path) {
  std::map<std::string, Section> sections;
  RunConfig cfg;
  cfg.path = path;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    // ';' separates polynomial terms, so only a leading ';' starts a comment.
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty() || line.front() == ';') continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::config_error, where + "malformed section header '" + line + "'");
      current = trim(line.substr(1, line.size() - 2));
      if (!schema().count(current)) throw Error(ErrorKind::config_error, where + "unknown section [" + current + "]");
      if (sections.count(current)) throw Error(ErrorKind::config_error, where + "duplicate section [" + current + "]");
      sections[current];
      cfg.sections.push_back(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config_error, where + "expected key = value, got '" + line + "'");
    if (current.empty()) throw Error(ErrorKind::config_error, where + "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    if (!schema().at(current).count(key)) {
      throw Error(ErrorKind::config_error, where + "[" + current + "] unknown key '" + key + "'");
    }
    if (sections[current].count(key)) {
      throw Error(ErrorKind::config_error, where + "[" + current + "] duplicate key '" + key + "'");
    }
    sections[current][key] = Entry{trim(line.substr(eq + 1)), line_no, false};
  }

  Reader r(sections, path);

  // [potential]
  if (!sections.count("potential")) throw Error(ErrorKind::config_error, path + ": missing [potential] section");
  PotentialConfig& pc = cfg.potential;
  if (auto v = r.text("potential", "variant")) pc.variant = *v;
  if (pc.variant == "scalar_cubic" || pc.variant == "decoupled_quartic") {
    if (auto v = r.number("potential", "alpha")) pc.alpha = *v;
    if (auto v = r.number("potential", "beta")) pc.beta = *v;
    if (!(pc.alpha > 0 && pc.alpha < 2)) r.fail("potential", "alpha", "must lie in (0, 2)");
    if (pc.variant == "decoupled_quartic" && !(pc.beta >= pc.alpha && pc.beta < 2)) {
      r.fail("potential", "beta", "must satisfy alpha <= beta < 2");
    }
    for (const char* k : {"terms", "well_b"}) {
      if (r.find("potential", k)) r.fail("potential", k, "only valid for variant user_polynomial");
    }
    if (pc.variant == "scalar_cubic" && r.find("potential", "beta")) {
      r.fail("potential", "beta", "only valid for variant decoupled_quartic");
    }
  } else if (pc.variant == "user_polynomial") {
    const auto b = r.list("potential", "well_b");
    if (!b || b->empty()) r.fail("potential", "well_b", "required for user_polynomial");
    if (static_cast<int>(b->size()) > kMaxDim) r.fail("potential", "well_b", "dimension exceeds " + std::to_string(kMaxDim));
    pc.well_b = to_point(*b);
    const auto terms = r.text("potential", "terms");
    if (!terms) r.fail("potential", "terms", "required for user_polynomial");
    for (const auto& t : split(*terms, ';')) {
      if (t.empty()) continue;
      std::istringstream ts(t);
      std::vector<std::string> fields;
      for (std::string f; ts >> f;) fields.push_back(f);
      if (fields.size() != b->size() + 1) {
        r.fail("potential", "terms", "term '" + t + "' needs a coefficient and " + std::to_string(b->size()) + " powers");
      }
      Monomial<double> m;
      m.coeff = r.to_double("potential", "terms", fields[0]);
      for (std::size_t k = 1; k < fields.size(); ++k) {
        int p = 0;
        auto [ptr, ec] = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), p);
        if (ec != std::errc() || ptr != fields[k].data() + fields[k].size() || p < 0) {
          r.fail("potential", "terms", "power '" + fields[k] + "' is not a nonnegative integer");
        }
        m.powers.push_back(p);
      }
      pc.terms.push_back(std::move(m));
    }
    if (pc.terms.empty()) r.fail("potential", "terms", "no terms given");
    if (r.find("potential", "alpha") || r.find("potential", "beta")) {
      r.fail("potential", "alpha", "alpha/beta are only valid for builtin variants");
    }
  } else {
    r.fail("potential", "variant", "unknown variant '" + pc.variant + "'");
  }
  {
    const auto lo = r.list("potential", "box_lo");
    const auto hi = r.list("potential", "box_hi");
    if (lo.has_value() != hi.has_value()) r.fail("potential", lo ? "box_hi" : "box_lo", "box_lo and box_hi go together");
    if (lo) {
      const std::size_t dim = pc.variant == "user_polynomial" ? static_cast<std::size_t>(pc.well_b.size())
                              : pc.variant == "scalar_cubic" ? 1
                                                              : 2;
      if (lo->size() != dim) r.fail("potential", "box_lo", "needs " + std::to_string(dim) + " entries");
      if (hi->size() != dim) r.fail("potential", "box_hi", "needs " + std::to_string(dim) + " entries");
      for (std::size_t k = 0; k < dim; ++k) {
        if (!((*lo)[k] < (*hi)[k])) r.fail("potential", "box_hi", "must exceed box_lo in every entry");
      }
      pc.box = Box<double>{to_point(*lo), to_point(*hi)};
    } else if (pc.variant == "user_polynomial") {
      r.fail("potential", "box_lo", "bounding box required for user_polynomial");
    }
  }

  // [grid]
  GridConfig& g = cfg.grid;
  if (auto v = r.number("grid", "h")) {
    r.positive("grid", "h", *v);
    g.h = *v;
  }
  if (auto v = r.number("grid", "x_left")) {
    if (!(*v < 0)) r.fail("grid", "x_left", "must be negative");
    g.x_left = *v;
  }
  if (auto v = r.number("grid", "x_right")) {
    r.positive("grid", "x_right", *v);
    g.x_right = *v;
  }
  if (auto v = r.text("grid", "refinement")) {
    if (*v == "uniform") {
      g.refinement = Spacing::uniform;
    } else if (*v == "geometric") {
      g.refinement = Spacing::geometric;
    } else {
      r.fail("grid", "refinement", "expected uniform or geometric, got '" + *v + "'");
    }
  }
  if (auto v = r.number("grid", "ratio")) {
    if (!(*v >= 1)) r.fail("grid", "ratio", "must be at least 1");
    g.ratio = *v;
  }
  if (auto v = r.number("grid", "h_max")) {
    if (!(*v >= g.h)) r.fail("grid", "h_max", "must be at least h");
    g.h_max = *v;
  }

  // [solver]
  MinimizeOptions& s = cfg.solver;
  if (auto v = r.number("solver", "opt_tol")) {
    r.positive("solver", "opt_tol", *v);
    s.opt_tol = *v;
  }
  if (auto v = r.number("solver", "feas_tol")) {
    r.positive("solver", "feas_tol", *v);
    s.feas_tol = *v;
  }
  if (auto v = r.number("solver", "penalty_kappa")) {
    if (!(*v >= 0)) r.fail("solver", "penalty_kappa", "must be nonnegative");
    s.penalty_kappa = *v;
  }
  if (auto v = r.integer("solver", "max_iters")) {
    if (*v <= 0) r.fail("solver", "max_iters", "must be positive");
    s.max_iters = *v;
  }
  if (auto v = r.integer("solver", "restarts")) {
    if (*v < 0 || *v > 100) r.fail("solver", "restarts", "must lie in [0, 100]");
    s.restarts = static_cast<int>(*v);
  }
  if (auto v = r.number("solver", "perturbation")) {
    if (!(*v >= 0)) r.fail("solver", "perturbation", "must be nonnegative");
    s.perturbation = *v;
  }
  if (auto v = r.integer("solver", "seed")) {
    if (*v < 0 || *v > 4294967295L) r.fail("solver", "seed", "must lie in [0, 2^32)");
    s.seed = static_cast<unsigned>(*v);
  }
  if (auto v = r.number("solver", "armijo_c1")) {
    r.open_unit("solver", "armijo_c1", *v);
    s.armijo_c1 = *v;
  }
  if (auto v = r.number("solver", "shrink")) {
    r.open_unit("solver", "shrink", *v);
    s.shrink = *v;
  }
  if (auto v = r.number("solver", "proj_tol")) {
    r.positive("solver", "proj_tol", *v);
    s.projection.tol = *v;
  }

  // mode sections
  if (auto v = r.number("bounds", "c")) {
    r.positive("bounds", "c", *v);
    cfg.bounds_c = *v;
  }
  {
    const auto c = r.number("gamma", "c");
    const auto list = r.list("gamma", "c_list");
    if (c && list) r.fail("gamma", "c_list", "give either c or c_list, not both");
    if (c) {
      r.positive("gamma", "c", *c);
      cfg.gamma_c_list = {*c};
    }
    if (list) {
      if (list->empty()) r.fail("gamma", "c_list", "must not be empty");
      for (std::size_t i = 0; i < list->size(); ++i) {
        if (!((*list)[i] > 0)) r.fail("gamma", "c_list", "entries must be positive");
        if (i > 0 && !((*list)[i] > (*list)[i - 1])) r.fail("gamma", "c_list", "entries must be strictly increasing");
      }
      cfg.gamma_c_list = *list;
    }
    if (auto v = r.boolean("gamma", "warm_start")) cfg.gamma_warm_start = *v;
  }
  if (auto v = r.number("speed", "c_tol")) {
    r.positive("speed", "c_tol", *v);
    cfg.speed.c_tol = *v;
  }
  if (auto v = r.number("speed", "expansion")) {
    if (!(*v > 1)) r.fail("speed", "expansion", "must exceed 1");
    cfg.speed.expansion = *v;
  }
  if (auto v = r.integer("speed", "max_expansions")) {
    if (*v < 0) r.fail("speed", "max_expansions", "must be nonnegative");
    cfg.speed.max_expansions = static_cast<int>(*v);
  }
  if (auto v = r.boolean("speed", "warm_start")) cfg.speed.warm_start = *v;
  if (auto v = r.number("speed", "gamma_zero_scale")) {
    r.positive("speed", "gamma_zero_scale", *v);
    cfg.speed.gamma_zero_scale = *v;
  }
  if (auto v = r.number("verify", "c")) {
    r.positive("verify", "c", *v);
    cfg.verify_c = *v;
  }
  if (auto v = r.number("verify", "gamma_hat")) cfg.verify_gamma_hat = *v;
  if (auto v = r.text("verify", "profile")) {
    if (v->empty()) r.fail("verify", "profile", "must name a CSV file");
    cfg.verify_profile = *v;
  }
  if (auto v = r.text("output", "directory")) {
    if (v->empty()) r.fail("output", "directory", "must not be empty");
    cfg.out_dir = *v;
  }
  if (auto v = r.text("output", "report")) {
    if (v->empty() || v->find('/') != std::string::npos) r.fail("output", "report", "must be a plain file name");
    cfg.report_name = *v;
  }

  for (const auto& [name, sec] : sections) {
    for (const auto& [key, e] : sec) {
      if (!e.used) r.fail(name, key, "not valid for this potential variant");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_error, "cannot open config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), path);
}

PotentialSpec<double> make_potential(const PotentialConfig& cfg) {
  PotentialSpec<double> spec;
  if (cfg.variant == "scalar_cubic") {
    spec = scalar_cubic(cfg.alpha);
  } else if (cfg.variant == "decoupled_quartic") {
    spec = decoupled_quartic(cfg.alpha, cfg.beta);
  } else {
    return user_polynomial(cfg.terms, cfg.well_b, *cfg.box);
  }
  if (cfg.box) spec.bounding_box = *cfg.box;
  return spec;
}

Grid<double> make_grid(const GridConfig& cfg, const PotentialSpec<double>& spec,
                       const PotentialConstants<double>& consts) {
  const Grid<double> def = default_grid(spec, consts, cfg.h);
  const double xl = cfg.x_left.value_or(def.x_left());
  const double xr = cfg.x_right.value_or(def.x_right());
  if (cfg.refinement == Spacing::geometric) return Grid<double>::geometric(xl, xr, cfg.h, cfg.ratio, cfg.h_max);
  return Grid<double>::uniform(xl, xr, cfg.h);
}

std::string resolve_path(const RunConfig& cfg, const std::string& p) {
  namespace fs = std::filesystem;
  const fs::path q(p);
  if (q.is_absolute()) return p;
  return (fs::path(cfg.path).parent_path() / q).string();
}

}  // namespace wave
