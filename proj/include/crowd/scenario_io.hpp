#pragma once

// Scenario files are TOML:
//
//   name = "narrow_passage"
//   [geometry]              m
//   [[obstacle]]            id i0 k0 i1 k1 bc
//   [[target]]              id side start length
//   [[inlet]]               population side start length
//   [physics]               alpha dt retrograde_guard grad_eps solver_tol solver_max_iter
//   [schedule]              n_steps snapshot_every mass_epsilon
//   [output]                directory matrices images
//   [[population]]          id targets exit_inlets mode beta radius theta_max anisotropic
//                           wall_density target_value wall_left wall_right wall_bottom wall_top
//   [[population.blob]]     i0 k0 i1 k1 density
//   [[population.inflow]]   side start length density first_step last_step
//   [[population.inlet_bc]] inlet bc
//
// Boundary conditions are written "dirichlet <value>" or "neumann". Missing keys keep
// their defaults; unknown keys and wrongly typed values are errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "crowd/output.hpp"
#include "crowd/scenario.hpp"

namespace crowd {

namespace detail {

/// Typed access to TOML tables that records errors with line numbers instead of throwing.
class TomlReader {
 public:
  explicit TomlReader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const toml::source_region& where, const std::string& msg) {
    errors_.push_back("line " + std::to_string(where.begin.line) + ": " + msg);
  }

  void allow(const toml::table& t, std::initializer_list<std::string_view> keys, std::string_view where) {
    for (const auto& [key, node] : t) {
      bool known = false;
      for (auto k : keys) known = known || key.str() == k;
      if (!known) error(key.source(), "unknown key '" + std::string(key.str()) + "' in " + std::string(where));
    }
  }

  const toml::table* table(const toml::table& t, std::string_view key) {
    const auto* n = t.get(key);
    if (!n) return nullptr;
    if (const auto* tt = n->as_table()) return tt;
    error(n->source(), "'" + std::string(key) + "' must be a table");
    return nullptr;
  }

  std::vector<const toml::table*> tables(const toml::table& t, std::string_view key) {
    std::vector<const toml::table*> out;
    const auto* n = t.get(key);
    if (!n) return out;
    const auto* arr = n->as_array();
    if (arr && arr->is_array_of_tables()) {
      for (const auto& e : *arr) out.push_back(e.as_table());
    } else {
      error(n->source(), "'" + std::string(key) + "' must be an array of tables");
    }
    return out;
  }

  void number(const toml::table& t, std::string_view key, double& out) {
    if (const auto* n = t.get(key)) {
      if (auto v = n->value<double>(); v && n->is_number()) out = *v;
      else type_error(*n, key, "a number");
    }
  }

  void integer(const toml::table& t, std::string_view key, int& out) {
    if (const auto* n = t.get(key)) {
      if (!as_int(*n, out)) type_error(*n, key, "an integer");
    }
  }

  void boolean(const toml::table& t, std::string_view key, bool& out) {
    if (const auto* n = t.get(key)) {
      if (auto v = n->as_boolean()) out = v->get();
      else type_error(*n, key, "true or false");
    }
  }

  void string(const toml::table& t, std::string_view key, std::string& out) {
    if (const auto* n = t.get(key)) {
      if (auto v = n->as_string()) out = v->get();
      else type_error(*n, key, "a string");
    }
  }

  void numbers(const toml::table& t, std::string_view key, std::vector<double>& out) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto* arr = n->as_array();
    std::vector<double> xs;
    for (std::size_t i = 0; arr && i < arr->size(); ++i) {
      const auto& e = *arr->get(i);
      if (!e.is_number()) {
        arr = nullptr;
        break;
      }
      xs.push_back(*e.value<double>());
    }
    if (arr) out = std::move(xs);
    else type_error(*n, key, "an array of numbers");
  }

  void integers(const toml::table& t, std::string_view key, std::vector<int>& out) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto* arr = n->as_array();
    std::vector<int> xs;
    for (std::size_t i = 0; arr && i < arr->size(); ++i) {
      int v = 0;
      if (!as_int(*arr->get(i), v)) {
        arr = nullptr;
        break;
      }
      xs.push_back(v);
    }
    if (arr) out = std::move(xs);
    else type_error(*n, key, "an array of integers");
  }

  void side(const toml::table& t, std::string_view key, Side& out) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto s = n->value<std::string>();
    if (s == "left") out = Side::left;
    else if (s == "right") out = Side::right;
    else if (s == "bottom") out = Side::bottom;
    else if (s == "top") out = Side::top;
    else type_error(*n, key, "one of \"left\", \"right\", \"bottom\", \"top\"");
  }

  void face(const toml::table& t, std::string_view key, FaceCondition& out) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto s = n->value<std::string>();
    if (s == "neumann") {
      out = FaceCondition::neumann();
      return;
    }
    if (s && s->starts_with("dirichlet")) {
      std::istringstream rest(s->substr(9));
      double v = 0.0;
      std::string extra;
      if (rest.str().find_first_not_of(' ') == std::string::npos) {
        out = FaceCondition::dirichlet(0.0);
        return;
      }
      if ((rest >> v) && !(rest >> extra)) {
        out = FaceCondition::dirichlet(v);
        return;
      }
    }
    type_error(*n, key, "\"neumann\" or \"dirichlet <value>\"");
  }

  void mode(const toml::table& t, std::string_view key, InteractionMode& out) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto s = n->value<std::string>();
    if (s == "mass_dependent") out = InteractionMode::mass_dependent;
    else if (s == "mass_independent") out = InteractionMode::mass_independent;
    else type_error(*n, key, "\"mass_dependent\" or \"mass_independent\"");
  }

 private:
  static bool as_int(const toml::node& n, int& out) {
    const auto* v = n.as_integer();
    if (!v || v->get() < std::numeric_limits<int>::min() || v->get() > std::numeric_limits<int>::max())
      return false;
    out = static_cast<int>(v->get());
    return true;
  }

  void type_error(const toml::node& n, std::string_view key, const char* expected) {
    error(n.source(), "'" + std::string(key) + "' must be " + expected);
  }

  std::vector<std::string>& errors_;
};

inline std::string face_text(const FaceCondition& f) {
  return f.type == BcType::neumann_zero ? "neumann" : "dirichlet " + format_double(f.value);
}

}  // namespace detail

/// Parses scenario text; throws ParseError listing every problem with its line number.
inline Scenario parse_scenario_text(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::parse_error, "scenario has 1 error(s):\n  line " +
                                            std::to_string(e.source().begin.line) + ": " +
                                            std::string(e.description()));
  }

  std::vector<std::string> errors;
  detail::TomlReader r(errors);
  Scenario s;
  r.allow(root, {"name", "geometry", "obstacle", "target", "inlet", "physics", "schedule", "output", "population"},
          "top level");
  r.string(root, "name", s.name);

  if (const auto* g = r.table(root, "geometry")) {
    r.allow(*g, {"m"}, "[geometry]");
    r.integer(*g, "m", s.geometry.m);
  }
  for (const auto* t : r.tables(root, "obstacle")) {
    auto& o = s.geometry.obstacles.emplace_back();
    r.allow(*t, {"id", "i0", "k0", "i1", "k1", "bc"}, "[[obstacle]]");
    r.integer(*t, "id", o.rect.id);
    r.integer(*t, "i0", o.rect.i0);
    r.integer(*t, "k0", o.rect.k0);
    r.integer(*t, "i1", o.rect.i1);
    r.integer(*t, "k1", o.rect.k1);
    r.face(*t, "bc", o.bc);
  }
  for (const bool target : {true, false}) {
    for (const auto* t : r.tables(root, target ? "target" : "inlet")) {
      auto& run = (target ? s.geometry.targets : s.geometry.inlets).emplace_back();
      const char* id = target ? "id" : "population";
      r.allow(*t, {id, "side", "start", "length"}, target ? "[[target]]" : "[[inlet]]");
      r.integer(*t, id, run.id);
      r.side(*t, "side", run.side);
      r.integer(*t, "start", run.start);
      r.integer(*t, "length", run.length);
    }
  }
  if (const auto* t = r.table(root, "physics")) {
    auto& p = s.physics;
    r.allow(*t, {"alpha", "dt", "retrograde_guard", "grad_eps", "solver_tol", "solver_max_iter"}, "[physics]");
    r.number(*t, "alpha", p.alpha);
    r.number(*t, "dt", p.dt);
    r.boolean(*t, "retrograde_guard", p.retrograde_guard);
    r.number(*t, "grad_eps", p.grad_eps);
    r.number(*t, "solver_tol", p.solver_tol);
    r.integer(*t, "solver_max_iter", p.solver_max_iter);
  }
  if (const auto* t = r.table(root, "schedule")) {
    r.allow(*t, {"n_steps", "snapshot_every", "mass_epsilon"}, "[schedule]");
    r.integer(*t, "n_steps", s.schedule.n_steps);
    r.integer(*t, "snapshot_every", s.schedule.snapshot_every);
    r.number(*t, "mass_epsilon", s.schedule.mass_epsilon);
  }
  if (const auto* t = r.table(root, "output")) {
    r.allow(*t, {"directory", "matrices", "images"}, "[output]");
    r.string(*t, "directory", s.output.directory);
    r.boolean(*t, "matrices", s.output.matrices);
    r.boolean(*t, "images", s.output.images);
  }
  for (const auto* t : r.tables(root, "population")) {
    auto& p = s.populations.emplace_back();
    auto& ip = p.interaction;
    r.allow(*t,
            {"id", "targets", "exit_inlets", "mode", "beta", "radius", "theta_max", "anisotropic", "wall_density",
             "target_value", "wall_left", "wall_right", "wall_bottom", "wall_top", "blob", "inflow", "inlet_bc"},
            "[[population]]");
    r.integer(*t, "id", p.id);
    r.integers(*t, "targets", p.targets);
    r.integers(*t, "exit_inlets", p.exit_inlets);
    r.mode(*t, "mode", ip.mode);
    r.numbers(*t, "beta", ip.beta);
    r.number(*t, "radius", ip.spec.radius);
    r.number(*t, "theta_max", ip.spec.theta_max);
    r.boolean(*t, "anisotropic", ip.spec.anisotropic);
    r.number(*t, "wall_density", ip.wall_density);
    r.number(*t, "target_value", p.target_value);
    r.face(*t, "wall_left", p.walls[static_cast<std::size_t>(Side::left)]);
    r.face(*t, "wall_right", p.walls[static_cast<std::size_t>(Side::right)]);
    r.face(*t, "wall_bottom", p.walls[static_cast<std::size_t>(Side::bottom)]);
    r.face(*t, "wall_top", p.walls[static_cast<std::size_t>(Side::top)]);
    for (const auto* bt : r.tables(*t, "blob")) {
      auto& b = p.blobs.emplace_back();
      r.allow(*bt, {"i0", "k0", "i1", "k1", "density"}, "[[population.blob]]");
      r.integer(*bt, "i0", b.rect.i0);
      r.integer(*bt, "k0", b.rect.k0);
      r.integer(*bt, "i1", b.rect.i1);
      r.integer(*bt, "k1", b.rect.k1);
      r.number(*bt, "density", b.density);
    }
    for (const auto* ft : r.tables(*t, "inflow")) {
      auto& f = p.inflows.emplace_back();
      r.allow(*ft, {"side", "start", "length", "density", "first_step", "last_step"}, "[[population.inflow]]");
      r.side(*ft, "side", f.cells.side);
      r.integer(*ft, "start", f.cells.start);
      r.integer(*ft, "length", f.cells.length);
      r.number(*ft, "density", f.density);
      r.integer(*ft, "first_step", f.first_step);
      r.integer(*ft, "last_step", f.last_step);
    }
    for (const auto* bt : r.tables(*t, "inlet_bc")) {
      r.allow(*bt, {"inlet", "bc"}, "[[population.inlet_bc]]");
      if (!bt->contains("inlet") || !bt->contains("bc")) {
        r.error(bt->source(), "[[population.inlet_bc]] needs inlet and bc");
        continue;
      }
      int inlet = 0;
      FaceCondition bc;
      r.integer(*bt, "inlet", inlet);
      r.face(*bt, "bc", bc);
      p.inlet_bc[inlet] = bc;
    }
  }
  for (auto& p : s.populations)
    for (auto& f : p.inflows) f.cells.id = p.id;

  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(ErrorCode::parse_error, "scenario has " + std::to_string(errors.size()) + " error(s):" + msg);
  }
  return s;
}

/// Reads, parses and validates a scenario file.
inline Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  Scenario s = parse_scenario_text(buf.str());
  require_valid(s);
  return s;
}

inline toml::table to_toml(const Scenario& s) {
  auto ints = [](const std::vector<int>& xs) {
    toml::array a;
    for (int x : xs) a.push_back(x);
    return a;
  };
  auto run = [](const char* id_key, const BoundaryRun& r) {
    return toml::table{{id_key, r.id}, {"side", to_string(r.side)}, {"start", r.start}, {"length", r.length}};
  };

  toml::array obstacles, targets, inlets, populations;
  for (const auto& o : s.geometry.obstacles) {
    obstacles.push_back(toml::table{{"id", o.rect.id}, {"i0", o.rect.i0}, {"k0", o.rect.k0}, {"i1", o.rect.i1},
                                    {"k1", o.rect.k1}, {"bc", detail::face_text(o.bc)}});
  }
  for (const auto& t : s.geometry.targets) targets.push_back(run("id", t));
  for (const auto& t : s.geometry.inlets) inlets.push_back(run("population", t));
  for (const auto& p : s.populations) {
    const auto& ip = p.interaction;
    toml::array beta, blobs, inflows, inlet_bc;
    for (double b : ip.beta) beta.push_back(b);
    for (const auto& b : p.blobs) {
      blobs.push_back(toml::table{{"i0", b.rect.i0}, {"k0", b.rect.k0}, {"i1", b.rect.i1}, {"k1", b.rect.k1},
                                  {"density", b.density}});
    }
    for (const auto& f : p.inflows) {
      inflows.push_back(toml::table{{"side", to_string(f.cells.side)}, {"start", f.cells.start},
                                    {"length", f.cells.length}, {"density", f.density},
                                    {"first_step", f.first_step}, {"last_step", f.last_step}});
    }
    for (const auto& [inlet, bc] : p.inlet_bc) inlet_bc.push_back(toml::table{{"inlet", inlet}, {"bc", detail::face_text(bc)}});
    toml::table pt{{"id", p.id},
                   {"targets", ints(p.targets)},
                   {"exit_inlets", ints(p.exit_inlets)},
                   {"mode", ip.mode == InteractionMode::mass_dependent ? "mass_dependent" : "mass_independent"},
                   {"beta", beta},
                   {"radius", ip.spec.radius},
                   {"theta_max", ip.spec.theta_max},
                   {"anisotropic", ip.spec.anisotropic},
                   {"wall_density", ip.wall_density},
                   {"target_value", p.target_value},
                   {"wall_left", detail::face_text(p.walls[static_cast<std::size_t>(Side::left)])},
                   {"wall_right", detail::face_text(p.walls[static_cast<std::size_t>(Side::right)])},
                   {"wall_bottom", detail::face_text(p.walls[static_cast<std::size_t>(Side::bottom)])},
                   {"wall_top", detail::face_text(p.walls[static_cast<std::size_t>(Side::top)])}};
    if (!blobs.empty()) pt.insert("blob", blobs);
    if (!inflows.empty()) pt.insert("inflow", inflows);
    if (!inlet_bc.empty()) pt.insert("inlet_bc", inlet_bc);
    populations.push_back(std::move(pt));
  }

  const auto& ph = s.physics;
  toml::table root{
      {"name", s.name},
      {"geometry", toml::table{{"m", s.geometry.m}}},
      {"physics", toml::table{{"alpha", ph.alpha},
                              {"dt", ph.dt},
                              {"retrograde_guard", ph.retrograde_guard},
                              {"grad_eps", ph.grad_eps},
                              {"solver_tol", ph.solver_tol},
                              {"solver_max_iter", ph.solver_max_iter}}},
      {"schedule", toml::table{{"n_steps", s.schedule.n_steps},
                               {"snapshot_every", s.schedule.snapshot_every},
                               {"mass_epsilon", s.schedule.mass_epsilon}}},
      {"output", toml::table{{"directory", s.output.directory},
                             {"matrices", s.output.matrices},
                             {"images", s.output.images}}},
  };
  if (!obstacles.empty()) root.insert("obstacle", obstacles);
  if (!targets.empty()) root.insert("target", targets);
  if (!inlets.empty()) root.insert("inlet", inlets);
  if (!populations.empty()) root.insert("population", populations);
  return root;
}

inline std::string serialize(const Scenario& s) {
  std::ostringstream os;
  os << to_toml(s) << '\n';
  return os.str();
}

/// 64-bit FNV-1a of the serialized scenario.
inline std::uint64_t digest(const Scenario& s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(s)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace crowd
