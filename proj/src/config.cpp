#include "msfv/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace msfv {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) { throw ConfigError(ConfigError::Kind::Validation, msg); }

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field + " must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) invalid(field + " must be a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

int get_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) invalid(field + " must be an integer");
  return v.get<int>();
}

Vector get_vector(const json& v, const std::string& field) {
  if (!v.is_array()) invalid(field + " must be an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = get_number(v[i], field);
  return out;
}

Matrix get_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) invalid(field + " must be a non-empty array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || v[r].size() != cols) invalid(field + " rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_number(v[r][c], field);
  }
  return out;
}

std::pair<double, double> get_range(const json& v, const std::string& field) {
  const Vector r = get_vector(v, field);
  if (r.size() != 2 || !(r(0) < r(1))) invalid(field + " must be an increasing pair [lo, hi]");
  return {r(0), r(1)};
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

// Cell bounds of a uniform grid from its indices, exact at the grid lines.
struct Box {
  double x0, x1, y0, y1;
};

Box cell_box(const Mesh& mesh, std::size_t K) {
  const auto [nx, ny] = *mesh.shape;
  const std::size_t i = K % nx;
  const std::size_t j = K / nx;
  const double fx = static_cast<double>(nx);
  const double fy = static_cast<double>(ny);
  return Box{static_cast<double>(i) / fx, static_cast<double>(i + 1) / fx, static_cast<double>(j) / fy,
             static_cast<double>(j + 1) / fy};
}

}  // namespace

Matrix coefficients_1d() {
  Matrix c(3, 3);
  c << 0.0, 0.2, 1.0,
       0.2, 0.0, 0.1,
       1.0, 0.1, 0.0;
  return c;
}

Matrix coefficients_2d() {
  Matrix c(3, 3);
  c << 0.0, 0.1, 0.2,
       0.1, 0.0, 2.0,
       0.2, 2.0, 0.0;
  return c;
}

std::vector<Block> default_blocks() {
  return {Block{0, 0.15, 0.45, 0.15, 0.85}, Block{1, 0.55, 0.85, 0.15, 0.85}};
}

RunConfig make_1d_config(const std::string& preset, std::size_t N, double dt, double T) {
  RunConfig cfg;
  cfg.mesh.dimension = 1;
  cfg.mesh.N = N;
  cfg.c = coefficients_1d();
  cfg.initial.preset = preset;
  cfg.dt = dt;
  cfg.T = T;
  return cfg;
}

RunConfig make_2d_config(std::size_t N, double dt, double T) {
  RunConfig cfg;
  cfg.mesh.dimension = 2;
  cfg.mesh.Nx = N;
  cfg.mesh.Ny = N;
  cfg.c = coefficients_2d();
  cfg.initial.preset = "blocks2d";
  cfg.initial.blocks = default_blocks();
  cfg.dt = dt;
  cfg.T = T;
  return cfg;
}

std::shared_ptr<const Mesh> build_mesh(const MeshConfig& cfg) {
  if (cfg.dimension == 1) return std::make_shared<const Mesh>(uniform_interval(cfg.N));
  if (cfg.dimension == 2) return std::make_shared<const Mesh>(uniform_rectangle(cfg.Nx, cfg.Ny));
  throw std::invalid_argument("mesh.dimension must be 1 or 2");
}

StateField preset_initial(const InitialConfig& init, std::shared_ptr<const Mesh> mesh, int n) {
  if (!mesh) throw std::invalid_argument("preset_initial: null mesh");
  const std::size_t nc = mesh->num_cells();
  Matrix u = Matrix::Zero(n, static_cast<Eigen::Index>(nc));
  const std::string& p = init.preset;

  if (p == "smooth1d" || p == "nonsmooth1d") {
    if (mesh->dimension != 1) throw std::invalid_argument("initial preset " + p + " requires a 1D mesh");
    if (n != 3) throw std::invalid_argument("initial preset " + p + " requires three species");
  }
  if (p == "blocks2d" && mesh->dimension != 2) throw std::invalid_argument("initial preset blocks2d requires a 2D mesh");
  if ((p == "nonsmooth1d" || p == "blocks2d") && !mesh->shape)
    throw std::invalid_argument("initial preset " + p + " requires a uniform grid");

  if (p == "smooth1d") {
    for (std::size_t K = 0; K < nc; ++K) {
      const double x = mesh->cells[K].center(0);
      const double a = 0.25 + 0.25 * std::cos(std::numbers::pi * x);
      u(0, K) = a;
      u(1, K) = a;
      u(2, K) = 1.0 - 2.0 * a;
    }
  } else if (p == "nonsmooth1d") {
    for (std::size_t K = 0; K < nc; ++K) {
      const Box b = cell_box(*mesh, K);
      const double h = b.x1 - b.x0;
      const double o1 = overlap(b.x0, b.x1, 3.0 / 8.0, 5.0 / 8.0);
      const double o2 = overlap(b.x0, b.x1, 1.0 / 8.0, 3.0 / 8.0) + overlap(b.x0, b.x1, 5.0 / 8.0, 7.0 / 8.0);
      u(0, K) = o1 / h;
      u(1, K) = o2 / h;
      u(2, K) = std::max(0.0, 1.0 - u(0, K) - u(1, K));
    }
  } else if (p == "blocks2d") {
    const auto blocks = init.blocks.empty() ? default_blocks() : init.blocks;
    for (const auto& blk : blocks) {
      if (blk.species < 0 || blk.species >= n - 1)
        throw std::invalid_argument("blocks2d: block species must be one of the first n-1 species");
    }
    for (std::size_t K = 0; K < nc; ++K) {
      const Box b = cell_box(*mesh, K);
      const double area = (b.x1 - b.x0) * (b.y1 - b.y0);
      for (const auto& blk : blocks) {
        u(blk.species, K) +=
            overlap(b.x0, b.x1, blk.x0, blk.x1) * overlap(b.y0, b.y1, blk.y0, blk.y1) / area;
      }
      double rest = 1.0;
      for (int i = 0; i + 1 < n; ++i) rest -= u(i, K);
      u(n - 1, K) = std::max(0.0, rest);
    }
  } else if (p == "uniform") {
    if (init.uniformValues.size() != n) throw std::invalid_argument("uniform preset: values must have n entries");
    u.colwise() = init.uniformValues;
  } else if (p == "table") {
    if (init.table.rows() != n || init.table.cols() != static_cast<Eigen::Index>(nc))
      throw std::invalid_argument("table preset: expected one row of n values per cell");
    u = init.table;
  } else {
    throw std::invalid_argument("unknown initial preset '" + p + "'");
  }
  return StateField{std::move(mesh), std::move(u)};
}

void validate_config(const RunConfig& cfg) {
  if (cfg.mesh.dimension == 1) {
    if (cfg.mesh.N == 0) invalid("mesh.N must be positive");
  } else if (cfg.mesh.dimension == 2) {
    if (cfg.mesh.Nx == 0 || cfg.mesh.Ny == 0) invalid("mesh.Nx and mesh.Ny must be positive");
  } else {
    invalid("mesh.dimension must be 1 or 2");
  }

  if (cfg.c.size() == 0) invalid("species.c required");
  SpeciesSystem sys = [&] {
    try {
      return build_system(cfg.c);
    } catch (const std::invalid_argument& e) {
      invalid(e.what());
    }
  }();

  if (!(cfg.dt > 0.0)) invalid("time.dt must be positive");
  if (!(cfg.T >= cfg.dt)) invalid("time.T must be at least time.dt");
  for (double s : cfg.output.snapshotTimes)
    if (!(s >= 0.0 && s <= cfg.T)) invalid("output.snapshotTimes must lie in [0, time.T]");
  if (cfg.output.diagnosticsEvery < 1) invalid("output.diagnosticsEvery must be at least 1");
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    invalid(e.what());
  }

  if (cfg.initial.preset == "blocks2d") {
    const auto& blocks = cfg.initial.blocks;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      const auto& A = blocks[a];
      if (A.x0 < 0.0 || A.x1 > 1.0 || A.y0 < 0.0 || A.y1 > 1.0 || !(A.x0 < A.x1) || !(A.y0 < A.y1))
        invalid("initial.blocks[" + std::to_string(a) + "] must be a non-empty box inside the unit square");
      for (std::size_t b = a + 1; b < blocks.size(); ++b) {
        const auto& B = blocks[b];
        if (overlap(A.x0, A.x1, B.x0, B.x1) * overlap(A.y0, A.y1, B.y0, B.y1) > 0.0)
          invalid("initial.blocks[" + std::to_string(a) + "] and [" + std::to_string(b) + "] overlap");
      }
    }
  }

  StateField u0;
  try {
    u0 = preset_initial(cfg.initial, build_mesh(cfg.mesh), sys.n());
  } catch (const std::invalid_argument& e) {
    invalid(std::string("initial: ") + e.what());
  }
  for (Eigen::Index K = 0; K < u0.values.cols(); ++K) {
    if (!in_simplex(u0.values.col(K), 1e-12))
      invalid("initial: values in cell " + std::to_string(K) + " are not a composition (nonnegative, sum 1)");
  }
  const Vector M = u0.masses();
  for (Eigen::Index i = 0; i < M.size(); ++i)
    if (!(M(i) > 0.0)) invalid("initial: species " + std::to_string(i + 1) + " has zero total mass");
}

RunConfig load_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::Parse, std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError(ConfigError::Kind::Parse, "config must be a single object");

  RunConfig cfg;

  const json* mesh = find(doc, "mesh");
  if (!mesh || !mesh->is_object()) invalid("mesh required");
  if (const json* d = find(*mesh, "dimension")) cfg.mesh.dimension = get_int(*d, "mesh.dimension");
  if (cfg.mesh.dimension == 1) {
    const json* N = find(*mesh, "N");
    if (!N) invalid("mesh.N required");
    cfg.mesh.N = get_count(*N, "mesh.N");
  } else if (cfg.mesh.dimension == 2) {
    const json* nx = find(*mesh, "Nx");
    const json* ny = find(*mesh, "Ny");
    const json* N = find(*mesh, "N");
    if (nx && ny) {
      cfg.mesh.Nx = get_count(*nx, "mesh.Nx");
      cfg.mesh.Ny = get_count(*ny, "mesh.Ny");
    } else if (N) {
      cfg.mesh.Nx = cfg.mesh.Ny = get_count(*N, "mesh.N");
    } else {
      invalid("mesh.Nx and mesh.Ny required");
    }
  } else {
    invalid("mesh.dimension must be 1 or 2");
  }

  const json* species = find(doc, "species");
  const json* c = species ? find(*species, "c") : nullptr;
  if (!c) invalid("species.c required");
  cfg.c = get_matrix(*c, "species.c");
  if (const json* n = find(*species, "n")) {
    if (get_int(*n, "species.n") != cfg.c.rows()) invalid("species.n does not match the size of species.c");
  }

  const json* initial = find(doc, "initial");
  if (!initial || !initial->is_object()) invalid("initial required");
  const json* preset = find(*initial, "preset");
  if (!preset || !preset->is_string()) invalid("initial.preset required");
  cfg.initial.preset = preset->get<std::string>();
  const std::string& p = cfg.initial.preset;
  if (p == "uniform") {
    const json* v = find(*initial, "values");
    if (!v) invalid("initial.values required for preset uniform");
    cfg.initial.uniformValues = get_vector(*v, "initial.values");
    if (cfg.initial.uniformValues.size() != cfg.c.rows()) invalid("initial.values must have one entry per species");
  } else if (p == "table") {
    const json* v = find(*initial, "values");
    if (!v) invalid("initial.values required for preset table");
    cfg.initial.table = get_matrix(*v, "initial.values").transpose();
    if (cfg.initial.table.rows() != cfg.c.rows()) invalid("initial.values rows must have one entry per species");
  } else if (p == "blocks2d") {
    if (const json* blocks = find(*initial, "blocks")) {
      if (!blocks->is_array()) invalid("initial.blocks must be an array");
      for (std::size_t b = 0; b < blocks->size(); ++b) {
        const std::string field = "initial.blocks[" + std::to_string(b) + "]";
        const json& jb = (*blocks)[b];
        const json* s = find(jb, "species");
        const json* x = find(jb, "x");
        const json* y = find(jb, "y");
        if (!s || !x || !y) invalid(field + " needs species, x and y");
        Block blk;
        blk.species = get_int(*s, field + ".species") - 1;
        if (blk.species < 0 || blk.species >= cfg.c.rows() - 1)
          invalid(field + ".species must be between 1 and n-1");
        std::tie(blk.x0, blk.x1) = get_range(*x, field + ".x");
        std::tie(blk.y0, blk.y1) = get_range(*y, field + ".y");
        cfg.initial.blocks.push_back(blk);
      }
    } else {
      cfg.initial.blocks = default_blocks();
    }
  } else if (p != "smooth1d" && p != "nonsmooth1d") {
    invalid("initial.preset must be one of smooth1d, nonsmooth1d, blocks2d, uniform, table");
  }

  const json* time = find(doc, "time");
  if (!time) invalid("time required");
  const json* dt = find(*time, "dt");
  const json* T = find(*time, "T");
  if (!dt) invalid("time.dt required");
  if (!T) invalid("time.T required");
  cfg.dt = get_number(*dt, "time.dt");
  cfg.T = get_number(*T, "time.T");

  if (const json* solver = find(doc, "solver")) {
    if (const json* v = find(*solver, "newtonTol")) cfg.solver.newtonTol = get_number(*v, "solver.newtonTol");
    if (const json* v = find(*solver, "maxNewtonIters")) cfg.solver.maxNewtonIters = get_int(*v, "solver.maxNewtonIters");
    if (const json* v = find(*solver, "maxDampingHalvings"))
      cfg.solver.maxDampingHalvings = get_int(*v, "solver.maxDampingHalvings");
    if (const json* v = find(*solver, "projectionFloor"))
      cfg.solver.projectionFloor = get_number(*v, "solver.projectionFloor");
    if (const json* v = find(*solver, "logMeanEqualityThreshold"))
      cfg.solver.logMeanEqualityThreshold = get_number(*v, "solver.logMeanEqualityThreshold");
  }

  if (const json* output = find(doc, "output")) {
    if (const json* v = find(*output, "directory")) {
      if (!v->is_string()) invalid("output.directory must be a string");
      cfg.output.directory = v->get<std::string>();
    }
    if (const json* v = find(*output, "snapshotTimes")) {
      const Vector s = get_vector(*v, "output.snapshotTimes");
      cfg.output.snapshotTimes.assign(s.data(), s.data() + s.size());
    }
    if (const json* v = find(*output, "diagnosticsEvery"))
      cfg.output.diagnosticsEvery = get_int(*v, "output.diagnosticsEvery");
  }

  validate_config(cfg);
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

}  // namespace msfv
