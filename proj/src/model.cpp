#include "rtrb/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace rtrb {

bool Domain::contains(const Point& p, int dimension) const {
  if (p.x < x_lo || p.x > x_hi) return false;
  if (dimension == 2 && (p.y < y_lo || p.y > y_hi)) return false;
  return true;
}

namespace {

struct Tag {
  ExampleId id;
  const char* name;
};

constexpr Tag kTags[] = {
    {ExampleId::slab_scattering, "1d-ex1"},      {ExampleId::slab_varying, "1d-ex2"},
    {ExampleId::slab_two_material_1, "1d-ex3"},  {ExampleId::slab_two_material_2, "1d-ex4"},
    {ExampleId::slab_transport, "1d-ex5"},       {ExampleId::slab_robustness, "1d-robust"},
    {ExampleId::plane_checkerboard, "2d-ex1"},   {ExampleId::plane_scattering, "2d-ex2"},
    {ExampleId::plane_intermediate, "2d-ex3"},   {ExampleId::plane_transport, "2d-ex4"},
};

ScalarField constant(double c) {
  return [c](const Point&) { return c; };
}

InflowFunction zero_inflow() {
  return [](const Point&, const Direction&) { return 0.0; };
}

ProblemSpec slab(std::string name, double x_hi, double dx) {
  ProblemSpec p;
  p.name = std::move(name);
  p.dimension = 1;
  p.domain = {0.0, x_hi, 0.0, 0.0};
  p.default_cells = {static_cast<int>(std::lround(x_hi / dx)), 1};
  p.inflow = zero_inflow();
  return p;
}

ProblemSpec plane(std::string name) {
  ProblemSpec p;
  p.name = std::move(name);
  p.dimension = 2;
  p.domain = {0.0, 10.0, 0.0, 10.0};
  p.default_cells = {40, 40};
  p.inflow = zero_inflow();
  p.source = [](const Point& q) {
    const double dx = q.x - 5.0, dy = q.y - 5.0;
    return std::exp(-100.0 * (dx * dx + dy * dy));
  };
  return p;
}

}  // namespace

ExampleId parse_example_id(const std::string& tag) {
  for (const auto& t : kTags)
    if (tag == t.name) return t.id;
  throw ConfigError("unknown example tag '" + tag + "'");
}

std::string example_tag(ExampleId id) {
  for (const auto& t : kTags)
    if (t.id == id) return t.name;
  throw ConfigError("unknown example id");
}

Region checkerboard_region(double x, double y) {
  if (!(x >= 0.0 && x <= 10.0 && y >= 0.0 && y <= 10.0))
    throw std::out_of_range("checkerboard_region: point outside [0,10]^2");
  for (double cx : {3.0, 7.0})
    for (double cy : {3.0, 7.0})
      if (std::max(std::abs(x - cx), std::abs(y - cy)) < 1.0) return Region::white;
  return Region::black;
}

ProblemSpec build_example(ExampleId id, std::optional<double> c) {
  constexpr double dx = 0.125;
  switch (id) {
    case ExampleId::slab_scattering: {
      auto p = slab("1d-ex1", 10.0, dx);
      p.source = constant(0.01);
      p.sigma_t = constant(100.0);
      p.sigma_s = constant(100.0);
      return p;
    }
    case ExampleId::slab_varying: {
      auto p = slab("1d-ex2", 10.0, dx);
      p.source = constant(0.01);
      p.sigma_t = [](const Point& q) { return 100.0 * (1.0 + q.x); };
      p.sigma_s = p.sigma_t;
      return p;
    }
    case ExampleId::slab_two_material_1: {
      // interface values come from the left material
      auto p = slab("1d-ex3", 20.0, dx);
      p.source = [](const Point& q) { return q.x <= 10.0 ? 5.0 : 0.0; };
      p.sigma_t = constant(100.0);
      p.sigma_s = [](const Point& q) { return q.x <= 10.0 ? 90.0 : 100.0; };
      return p;
    }
    case ExampleId::slab_two_material_2: {
      auto p = slab("1d-ex4", 11.0, dx);
      p.source = constant(0.0);
      p.sigma_t = [](const Point& q) { return q.x <= 1.0 ? 2.0 : 100.0; };
      p.sigma_s = [](const Point& q) { return q.x <= 1.0 ? 0.0 : 100.0; };
      const double x_lo = p.domain.x_lo;
      p.inflow = [x_lo](const Point& q, const Direction& d) {
        return (q.x == x_lo && d.v() > 0.0) ? 5.0 : 0.0;
      };
      return p;
    }
    case ExampleId::slab_transport: {
      auto p = slab("1d-ex5", 10.0, dx);
      p.source = constant(0.01);
      p.sigma_t = constant(1.2);
      p.sigma_s = constant(1.0);
      return p;
    }
    case ExampleId::slab_robustness: {
      if (!c) throw ConfigError("1d-robust requires the scattering strength C");
      if (*c < 0.0) throw ConfigError("1d-robust requires C >= 0");
      std::ostringstream name;
      name << "1d-robust(C=" << *c << ")";
      auto p = slab(name.str(), 10.0, dx);
      p.source = constant(0.01);
      p.sigma_t = constant(*c + 0.5);
      p.sigma_s = constant(*c);
      return p;
    }
    case ExampleId::plane_checkerboard: {
      auto p = plane("2d-ex1");
      p.sigma_s = [](const Point& q) { return checkerboard_region(q.x, q.y) == Region::white ? 1.0 : 100.0; };
      p.sigma_t = [](const Point& q) { return checkerboard_region(q.x, q.y) == Region::white ? 2.0 : 100.0; };
      return p;
    }
    case ExampleId::plane_scattering: {
      auto p = plane("2d-ex2");
      p.sigma_s = p.sigma_t = constant(100.0);
      return p;
    }
    case ExampleId::plane_intermediate: {
      auto p = plane("2d-ex3");
      p.sigma_s = p.sigma_t = constant(10.0);
      return p;
    }
    case ExampleId::plane_transport: {
      auto p = plane("2d-ex4");
      p.sigma_s = p.sigma_t = constant(1.0);
      return p;
    }
  }
  throw ConfigError("unknown example id");
}

void validate_cross_sections(const ProblemSpec& p, int samples) {
  const auto& d = p.domain;
  const int ny = p.dimension == 2 ? samples : 1;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < ny; ++j) {
      Point q{d.x_lo + (d.x_hi - d.x_lo) * i / (samples - 1), 0.0};
      if (p.dimension == 2) q.y = d.y_lo + (d.y_hi - d.y_lo) * j / (samples - 1);
      const double ss = p.sigma_s(q), st = p.sigma_t(q);
      if (!(ss >= 0.0) || !(st >= ss)) {
        std::ostringstream msg;
        msg << "cross sections violate 0 <= sigma_s <= sigma_t at (" << q.x << ", " << q.y << "): sigma_s=" << ss
            << " sigma_t=" << st;
        throw ConfigError(msg.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// key-value configuration

namespace {

struct Box {
  double x0, x1, y0, y1, value;
};

struct Gaussian {
  double amplitude, width, cx, cy;
};

struct FieldDef {
  double c0 = 0.0, cx = 0.0, cy = 0.0;
  std::vector<Box> boxes;
  std::vector<Gaussian> gaussians;
  bool set = false;
};

std::vector<double> numbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: '" + tok + "'");
    }
  }
  return out;
}

ScalarField make_field(const FieldDef& f, int dim) {
  return [f, dim](const Point& q) {
    double v = f.c0 + f.cx * q.x + f.cy * q.y;
    for (const auto& b : f.boxes) {
      const bool in_x = q.x >= b.x0 && q.x <= b.x1;
      const bool in_y = dim == 1 || (q.y >= b.y0 && q.y <= b.y1);
      if (in_x && in_y) {
        v = b.value;
        break;
      }
    }
    for (const auto& g : f.gaussians) {
      const double dx = q.x - g.cx, dy = dim == 2 ? q.y - g.cy : 0.0;
      v += g.amplitude * std::exp(-g.width * (dx * dx + dy * dy));
    }
    return v;
  };
}

}  // namespace

ProblemSpec parse_problem_config(const std::string& text) {
  std::map<std::string, FieldDef> fields{{"sigma_s", {}}, {"sigma_t", {}}, {"source", {}}};
  std::map<std::string, double> inflow{{"left", 0.0}, {"right", 0.0}, {"bottom", 0.0}, {"top", 0.0}};
  ProblemSpec p;
  p.name = "config";
  bool have_dim = false, have_domain = false, have_cells = false;
  std::vector<double> domain;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "name") {
      p.name = value;
    } else if (key == "dimension") {
      const auto v = numbers(key, value);
      if (v.size() != 1 || (v[0] != 1.0 && v[0] != 2.0)) throw ConfigError("dimension must be 1 or 2");
      p.dimension = static_cast<int>(v[0]);
      have_dim = true;
    } else if (key == "domain") {
      domain = numbers(key, value);
      have_domain = true;
    } else if (key == "cells") {
      const auto v = numbers(key, value);
      if (v.empty() || v.size() > 2) throw ConfigError("cells expects one or two integers");
      p.default_cells = {static_cast<int>(v[0]), v.size() > 1 ? static_cast<int>(v[1]) : 1};
      have_cells = true;
    } else if (key.rfind("inflow.", 0) == 0) {
      const std::string side = key.substr(7);
      if (!inflow.count(side)) throw ConfigError("unknown inflow side '" + side + "'");
      const auto v = numbers(key, value);
      if (v.size() != 1) throw ConfigError(key + " expects one value");
      inflow[side] = v[0];
    } else {
      const auto dot = key.find('.');
      const std::string base = key.substr(0, dot);
      const std::string kind = dot == std::string::npos ? "" : key.substr(dot + 1);
      auto it = fields.find(base);
      if (it == fields.end()) throw ConfigError("unknown config key '" + key + "'");
      auto& f = it->second;
      const auto v = numbers(key, value);
      f.set = true;
      if (kind.empty()) {
        if (v.size() != 1) throw ConfigError(key + " expects one value");
        f.c0 = v[0];
      } else if (kind == "affine") {
        if (v.size() < 2 || v.size() > 3) throw ConfigError(key + " expects c0 cx [cy]");
        f.c0 = v[0];
        f.cx = v[1];
        f.cy = v.size() > 2 ? v[2] : 0.0;
      } else if (kind == "box") {
        if (v.size() == 3) f.boxes.push_back({v[0], v[1], 0.0, 0.0, v[2]});
        else if (v.size() == 5) f.boxes.push_back({v[0], v[1], v[2], v[3], v[4]});
        else throw ConfigError(key + " expects x0 x1 value or x0 x1 y0 y1 value");
      } else if (kind == "gaussian") {
        if (v.size() == 3) f.gaussians.push_back({v[0], v[1], v[2], 0.0});
        else if (v.size() == 4) f.gaussians.push_back({v[0], v[1], v[2], v[3]});
        else throw ConfigError(key + " expects amplitude width cx [cy]");
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }
  if (!have_dim) throw ConfigError("config is missing 'dimension'");
  if (!have_domain) throw ConfigError("config is missing 'domain'");
  if (domain.size() != static_cast<std::size_t>(2 * p.dimension))
    throw ConfigError("domain expects 2 values per axis");
  p.domain.x_lo = domain[0];
  p.domain.x_hi = domain[1];
  if (p.dimension == 2) {
    p.domain.y_lo = domain[2];
    p.domain.y_hi = domain[3];
  } else {
    p.domain.y_lo = p.domain.y_hi = 0.0;
  }
  if (!(p.domain.x_hi > p.domain.x_lo) || (p.dimension == 2 && !(p.domain.y_hi > p.domain.y_lo)))
    throw ConfigError("domain bounds must be increasing");
  if (!fields["sigma_t"].set) throw ConfigError("config is missing 'sigma_t'");
  if (!have_cells) {
    p.default_cells = {static_cast<int>(std::lround((p.domain.x_hi - p.domain.x_lo) / 0.125)),
                       p.dimension == 2 ? 40 : 1};
    if (p.dimension == 2) p.default_cells[0] = 40;
  }
  if (p.default_cells[0] < 1 || p.default_cells[1] < 1) throw ConfigError("cells must be positive");

  p.sigma_s = make_field(fields["sigma_s"], p.dimension);
  p.sigma_t = make_field(fields["sigma_t"], p.dimension);
  p.source = make_field(fields["source"], p.dimension);
  const Domain dom = p.domain;
  const double left = inflow["left"], right = inflow["right"], bottom = inflow["bottom"], top = inflow["top"];
  p.inflow = [dom, left, right, bottom, top](const Point& q, const Direction& d) {
    if (q.x == dom.x_lo && d.x() > 0.0) return left;
    if (q.x == dom.x_hi && d.x() < 0.0) return right;
    if (d.dimension() == 2) {
      if (q.y == dom.y_lo && d.y() > 0.0) return bottom;
      if (q.y == dom.y_hi && d.y() < 0.0) return top;
    }
    return 0.0;
  };
  validate_cross_sections(p);
  return p;
}

ProblemSpec load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_config(ss.str());
}

}  // namespace rtrb
