#include "brte/config.hpp"

#include <fstream>
#include <sstream>

namespace brte {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error("config: " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) fail(path + "/" + it.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing required key '") + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

/// "auto" or a positive number.
double as_auto_or_positive(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return -1.0;
    fail(path, "expected a positive number or \"auto\"");
  }
  const double x = as_number(v, path);
  if (x <= 0) fail(path, "expected a positive number or \"auto\"");
  return x;
}

RVec as_vector(const json& v, int dim, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    fail(path, "expected an array of " + std::to_string(dim) + " numbers");
  RVec r(dim);
  for (int i = 0; i < dim; ++i) r[i] = as_number(v[static_cast<size_t>(i)], path);
  return r;
}

IVec as_ivec(const json& v, int dim, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    fail(path, "expected an array of " + std::to_string(dim) + " integers");
  IVec r;
  for (int i = 0; i < dim; ++i) r[i] = as_int(v[static_cast<size_t>(i)], path);
  return r;
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into line:column
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error("config: " + path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                e.what());
  }
}

void apply_override(json& j, const std::string& key, const std::string& value) {
  std::string pointer = "/";
  for (char c : key) pointer += (c == '.') ? '/' : c;
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }
  j[json::json_pointer(pointer)] = parsed;
}

std::string config_hash(const json& j) { return hex64(fnv1a64(j.dump())); }

RunConfig parse_config(const json& j) {
  RunConfig c;
  c.raw = j;
  c.content_hash = config_hash(j);

  check_keys(j, "", {"seed", "lattice", "potential", "vector_potential", "fields", "disorder",
                     "grid", "kernel", "evolution", "oracle", "units", "validate"});

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      fail("/seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<uint64_t>();
  }

  // lattice
  {
    const json& lat = require(j, "", "lattice");
    check_keys(lat, "/lattice", {"dimension", "basis"});
    c.dimension = as_int(require(lat, "/lattice", "dimension"), "/lattice/dimension");
    if (c.dimension < 1 || c.dimension > 3) fail("/lattice/dimension", "must be 1, 2 or 3");
    const json& rows = require(lat, "/lattice", "basis");
    if (!rows.is_array() || static_cast<int>(rows.size()) != c.dimension)
      fail("/lattice/basis", "expected " + std::to_string(c.dimension) + " rows");
    for (int r = 0; r < c.dimension; ++r)
      c.basis.push_back(as_vector(rows[static_cast<size_t>(r)], c.dimension,
                                  "/lattice/basis[" + std::to_string(r) + "]"));
  }

  // potential
  if (j.contains("potential")) {
    const json& pot = j["potential"];
    check_keys(pot, "/potential", {"coefficients"});
    if (pot.contains("coefficients")) {
      const json& cs = pot["coefficients"];
      if (!cs.is_array()) fail("/potential/coefficients", "expected an array");
      for (size_t i = 0; i < cs.size(); ++i) {
        const std::string p = "/potential/coefficients[" + std::to_string(i) + "]";
        check_keys(cs[i], p, {"mu", "re", "im"});
        const IVec mu = as_ivec(require(cs[i], p, "mu"), c.dimension, p + "/mu");
        const double re = as_number(require(cs[i], p, "re"), p + "/re");
        const double im = cs[i].contains("im") ? as_number(cs[i]["im"], p + "/im") : 0.0;
        c.potential.set(mu, {re, im});
      }
    }
  }

  // vector potential
  c.a_static = CellVectorPotential::zero(c.dimension);
  if (j.contains("vector_potential")) {
    const json& va = j["vector_potential"];
    check_keys(va, "/vector_potential", {"uniform", "periodic"});
    if (va.contains("uniform"))
      c.a_static.uniform = as_vector(va["uniform"], c.dimension, "/vector_potential/uniform");
    if (va.contains("periodic")) {
      const json& ps = va["periodic"];
      if (!ps.is_array()) fail("/vector_potential/periodic", "expected an array");
      for (size_t i = 0; i < ps.size(); ++i) {
        const std::string p = "/vector_potential/periodic[" + std::to_string(i) + "]";
        check_keys(ps[i], p, {"mu", "re", "im"});
        const IVec mu = as_ivec(require(ps[i], p, "mu"), c.dimension, p + "/mu");
        const RVec re = as_vector(require(ps[i], p, "re"), c.dimension, p + "/re");
        const RVec im = ps[i].contains("im")
                            ? as_vector(ps[i]["im"], c.dimension, p + "/im")
                            : RVec(RVec::Zero(c.dimension));
        Eigen::VectorXcd val(c.dimension);
        for (int l = 0; l < c.dimension; ++l) val[l] = cplx{re[l], im[l]};
        c.a_static.set_periodic(mu, val);
      }
    }
  }

  // uniform fields
  c.e_field = RVec::Zero(c.dimension);
  c.b_field = RVec::Zero(3);
  if (j.contains("fields")) {
    const json& f = j["fields"];
    check_keys(f, "/fields", {"e", "b"});
    if (f.contains("e")) c.e_field = as_vector(f["e"], c.dimension, "/fields/e");
    if (f.contains("b")) c.b_field = as_vector(f["b"], 3, "/fields/b");
  }

  // disorder
  if (j.contains("disorder")) {
    const json& d = j["disorder"];
    check_keys(d, "/disorder", {"model", "sigma2", "corr_length", "cutoff"});
    c.disorder.kind = correlation_kind_from_string(
        as_string(require(d, "/disorder", "model"), "/disorder/model"));
    c.disorder.dim = c.dimension;
    c.disorder.sigma2 = as_number(require(d, "/disorder", "sigma2"), "/disorder/sigma2");
    if (c.disorder.sigma2 < 0) fail("/disorder/sigma2", "must be nonnegative");
    c.disorder.corr_length = as_number(require(d, "/disorder", "corr_length"), "/disorder/corr_length");
    if (c.disorder.corr_length <= 0) fail("/disorder/corr_length", "must be positive");
    if (d.contains("cutoff")) c.disorder.cutoff = as_number(d["cutoff"], "/disorder/cutoff");
    if (c.disorder.kind == CorrelationKind::white_cutoff && c.disorder.cutoff <= 0)
      fail("/disorder/cutoff", "white_cutoff model needs a positive cutoff");
  }

  // grid
  {
    const json& g = require(j, "", "grid");
    check_keys(g, "/grid", {"bz_points", "pw_cutoff", "n_bands", "spatial_points", "box_length"});
    c.bz_points = as_int(require(g, "/grid", "bz_points"), "/grid/bz_points");
    if (c.bz_points < 1) fail("/grid/bz_points", "must be >= 1");
    c.pw_cutoff = as_number(require(g, "/grid", "pw_cutoff"), "/grid/pw_cutoff");
    if (c.pw_cutoff <= 0) fail("/grid/pw_cutoff", "must be positive");
    c.n_bands = as_int(require(g, "/grid", "n_bands"), "/grid/n_bands");
    if (c.n_bands < 1) fail("/grid/n_bands", "must be >= 1");
    if (g.contains("spatial_points")) {
      c.spatial_points = as_int(g["spatial_points"], "/grid/spatial_points");
      if (c.spatial_points < 1) fail("/grid/spatial_points", "must be >= 1");
    }
    if (g.contains("box_length")) {
      c.box_length = as_number(g["box_length"], "/grid/box_length");
      if (c.box_length <= 0) fail("/grid/box_length", "must be positive");
    }
  }

  // kernel
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    check_keys(k, "/kernel", {"eta_e", "xi", "convention", "shift", "window_radius"});
    if (k.contains("eta_e")) c.kernel.eta_E = as_auto_or_positive(k["eta_e"], "/kernel/eta_e");
    if (k.contains("xi")) c.kernel.xi = as_auto_or_positive(k["xi"], "/kernel/xi");
    if (k.contains("convention"))
      c.kernel.convention =
          convention_from_string(as_string(k["convention"], "/kernel/convention"));
    if (k.contains("shift")) c.kernel.shift_enabled = as_bool(k["shift"], "/kernel/shift");
    if (k.contains("window_radius"))
      c.window_radius = as_auto_or_positive(k["window_radius"], "/kernel/window_radius");
  }

  // evolution
  if (j.contains("evolution")) {
    const json& e = j["evolution"];
    check_keys(e, "/evolution",
               {"dt", "t_final", "method", "stencil", "snapshot_every", "allow_cfl_violation",
                "rebuild_threshold", "initial"});
    c.evolution.dt = as_number(require(e, "/evolution", "dt"), "/evolution/dt");
    if (c.evolution.dt <= 0) fail("/evolution/dt", "must be positive");
    c.evolution.t_final = as_number(require(e, "/evolution", "t_final"), "/evolution/t_final");
    if (c.evolution.t_final < 0) fail("/evolution/t_final", "must be nonnegative");
    if (e.contains("method")) {
      const std::string m = as_string(e["method"], "/evolution/method");
      if (m == "rk4") c.evolution.method = TimeMethod::rk4;
      else if (m == "euler") c.evolution.method = TimeMethod::euler;
      else fail("/evolution/method", "expected \"rk4\" or \"euler\"");
    }
    if (e.contains("stencil")) {
      const std::string s = as_string(e["stencil"], "/evolution/stencil");
      if (s == "upwind") c.evolution.stencil = Stencil::upwind;
      else if (s == "centered") c.evolution.stencil = Stencil::centered;
      else fail("/evolution/stencil", "expected \"upwind\" or \"centered\"");
    }
    if (e.contains("snapshot_every"))
      c.evolution.snapshot_every = as_int(e["snapshot_every"], "/evolution/snapshot_every");
    if (e.contains("allow_cfl_violation"))
      c.evolution.allow_cfl_violation = as_bool(e["allow_cfl_violation"], "/evolution/allow_cfl_violation");
    if (e.contains("rebuild_threshold"))
      c.evolution.rebuild_threshold = as_number(e["rebuild_threshold"], "/evolution/rebuild_threshold");
    if (e.contains("initial")) {
      const json& ic = e["initial"];
      const std::string p = "/evolution/initial";
      check_keys(ic, p, {"type", "band", "amplitude", "energy", "width", "anisotropy", "center"});
      auto& init = c.evolution.initial;
      if (ic.contains("type")) init.type = as_string(ic["type"], p + "/type");
      if (init.type != "uniform" && init.type != "gaussian_q" && init.type != "shell")
        fail(p + "/type", "expected \"uniform\", \"gaussian_q\" or \"shell\"");
      if (ic.contains("band")) init.band = as_int(ic["band"], p + "/band");
      if (init.band < 0 || init.band >= c.n_bands) fail(p + "/band", "band index out of range");
      if (ic.contains("amplitude")) init.amplitude = as_number(ic["amplitude"], p + "/amplitude");
      if (ic.contains("energy")) init.energy = as_number(ic["energy"], p + "/energy");
      if (ic.contains("width")) {
        init.width = as_number(ic["width"], p + "/width");
        if (init.width <= 0) fail(p + "/width", "must be positive");
      }
      if (ic.contains("anisotropy")) init.anisotropy = as_number(ic["anisotropy"], p + "/anisotropy");
      if (ic.contains("center")) {
        const RVec v = as_vector(ic["center"], c.dimension, p + "/center");
        init.center.assign(v.data(), v.data() + v.size());
      }
    }
  }

  // oracle
  if (j.contains("oracle")) {
    c.has_oracle = true;
    const json& o = j["oracle"];
    check_keys(o, "/oracle",
               {"box_cells", "points_per_cell", "seeds", "sigma2_list", "bz_points", "q_index",
                "band", "dt", "t_final", "record_every", "epsilon", "pw_cutoff", "n_bands",
                "include_potential", "window_radius"});
    auto& s = c.oracle;
    s.box_cells = as_int(require(o, "/oracle", "box_cells"), "/oracle/box_cells");
    s.pts_per_cell = as_int(require(o, "/oracle", "points_per_cell"), "/oracle/points_per_cell");
    s.n_seeds = as_int(require(o, "/oracle", "seeds"), "/oracle/seeds");
    if (s.box_cells < 1 || s.pts_per_cell < 1 || s.n_seeds < 1)
      fail("/oracle", "box_cells, points_per_cell and seeds must be positive");
    const json& sl = require(o, "/oracle", "sigma2_list");
    if (!sl.is_array() || sl.empty()) fail("/oracle/sigma2_list", "expected a nonempty array");
    for (size_t i = 0; i < sl.size(); ++i)
      s.sigma2_list.push_back(as_number(sl[i], "/oracle/sigma2_list"));
    s.bz_points = as_int(require(o, "/oracle", "bz_points"), "/oracle/bz_points");
    s.q_index = as_int(require(o, "/oracle", "q_index"), "/oracle/q_index");
    if (s.q_index < 0 || s.q_index >= s.bz_points) fail("/oracle/q_index", "out of range");
    if (o.contains("band")) s.band = as_int(o["band"], "/oracle/band");
    s.dt = as_number(require(o, "/oracle", "dt"), "/oracle/dt");
    s.t_final = as_number(require(o, "/oracle", "t_final"), "/oracle/t_final");
    if (o.contains("record_every")) s.record_every = as_int(o["record_every"], "/oracle/record_every");
    if (o.contains("epsilon")) s.epsilon = as_number(o["epsilon"], "/oracle/epsilon");
    s.pw_cutoff = as_number(require(o, "/oracle", "pw_cutoff"), "/oracle/pw_cutoff");
    if (o.contains("n_bands")) s.n_bands = as_int(o["n_bands"], "/oracle/n_bands");
    if (o.contains("include_potential"))
      s.include_potential = as_bool(o["include_potential"], "/oracle/include_potential");
    if (o.contains("window_radius"))
      s.window_radius = as_number(o["window_radius"], "/oracle/window_radius");
    s.seed_base = c.seed;
  }

  // units
  if (j.contains("units")) {
    const json& u = j["units"];
    check_keys(u, "/units", {"system", "energy_scale", "length_scale", "time_scale"});
    if (u.contains("system")) c.units.system = as_string(u["system"], "/units/system");
    if (c.units.system != "internal" && c.units.system != "scaled")
      fail("/units/system", "expected \"internal\" or \"scaled\"");
    if (u.contains("energy_scale")) c.units.energy = as_number(u["energy_scale"], "/units/energy_scale");
    if (u.contains("length_scale")) c.units.length = as_number(u["length_scale"], "/units/length_scale");
    if (u.contains("time_scale")) c.units.time = as_number(u["time_scale"], "/units/time_scale");
  }

  if (j.contains("validate")) {
    const json& v = j["validate"];
    check_keys(v, "/validate", {"include_oracle"});
    if (v.contains("include_oracle"))
      c.validate_include_oracle = as_bool(v["include_oracle"], "/validate/include_oracle");
  }

  return c;
}

}  // namespace brte
