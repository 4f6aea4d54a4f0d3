#include "rtrb/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rtrb {

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << sci(m(i, j));
    out << '\n';
  }
}

void write_vector(std::ostream& out, const char* name, const Vector& v) {
  out << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << sci(v[i]) << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of file");
    ++line_no_;
    return s;
  }

  // Reads a "<keyword> args..." line and returns a stream over the arguments.
  std::istringstream keyword(const std::string& expected) {
    std::istringstream ss(line());
    std::string k;
    ss >> k;
    if (k != expected) fail("expected '" + expected + "', found '" + k + "'");
    return ss;
  }

  template <class T>
  T value(std::istringstream& ss, const char* what) {
    T v;
    if (!(ss >> v)) fail(std::string("bad ") + what);
    return v;
  }

  Vector vector(const std::string& name) {
    auto ss = keyword(name);
    const auto n = value<Eigen::Index>(ss, "length");
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::istringstream row(line());
      v[i] = value<double>(row, "value");
    }
    return v;
  }

  Matrix matrix(const std::string& name) {
    auto ss = keyword(name);
    const auto rows = value<Eigen::Index>(ss, "row count");
    const auto cols = value<Eigen::Index>(ss, "column count");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::istringstream row(line());
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = value<double>(row, "matrix entry");
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string path_;
  int line_no_ = 0;
};

Direction make_direction(int dim, double a) { return dim == 1 ? Direction::slab(a) : Direction::planar(a); }
double direction_value(const Direction& d) { return d.dimension() == 1 ? d.v() : d.theta(); }

}  // namespace

void write_model(const ModelFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const ReducedModel& m = file.model;
  out << "rtrb-model v1\n";
  if (!file.example_tag.empty()) {
    out << "example " << file.example_tag;
    if (file.scattering) out << " scattering " << sci(*file.scattering);
    out << '\n';
  } else {
    std::vector<std::string> lines;
    std::istringstream ss(file.config_text);
    for (std::string l; std::getline(ss, l);) lines.push_back(l);
    out << "config " << lines.size() << '\n';
    for (const auto& l : lines) out << l << '\n';
  }
  out << "cells " << file.cells[0] << ' ' << file.cells[1] << '\n';
  out << "dimension " << m.dimension << '\n';
  out << "accelerator " << accelerator_name(file.accelerator) << '\n';
  out << "ls_degree " << m.ls_degree << '\n';
  out << "spectral_ratio " << sci(m.spectral_ratio) << '\n';
  out << "exhausted " << (m.exhausted ? 1 : 0) << '\n';
  out << "samples " << m.samples.size() << '\n';
  for (const auto& d : m.samples) {
    out << sci(direction_value(d));
    if (d.dimension() == 2) out << ' ' << sci(d.x()) << ' ' << sci(d.y());
    out << '\n';
  }
  write_vector(out, "rho", m.rho);
  write_vector(out, "singular_values", m.singular_values);
  write_matrix(out, "basis", m.basis);
  write_matrix(out, "right_factors", m.right_factors);
  out << "history " << m.history.size() << '\n';
  for (const auto& h : m.history)
    out << h.iteration << ' ' << sci(h.spectral_ratio) << ' ' << h.basis_rank << ' ' << sci(direction_value(h.selected))
        << ' ' << sci(h.indicator) << ' ' << (h.counterpart_added ? 1 : 0) << ' ' << h.ls_degree << ' '
        << h.sasi_iterations << '\n';
  out << "end\n";
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

ModelFile read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  Reader r(in, path);
  if (r.line() != "rtrb-model v1") r.fail("not an rtrb model file");
  ModelFile f;
  {
    std::istringstream ss(r.line());
    std::string k;
    ss >> k;
    if (k == "example") {
      f.example_tag = r.value<std::string>(ss, "example tag");
      std::string extra;
      if (ss >> extra) {
        if (extra != "scattering") r.fail("unexpected '" + extra + "'");
        f.scattering = r.value<double>(ss, "scattering strength");
      }
    } else if (k == "config") {
      const int n = r.value<int>(ss, "config line count");
      for (int i = 0; i < n; ++i) f.config_text += r.line() + '\n';
    } else {
      r.fail("expected 'example' or 'config'");
    }
  }
  {
    auto ss = r.keyword("cells");
    f.cells[0] = r.value<int>(ss, "cell count");
    f.cells[1] = r.value<int>(ss, "cell count");
  }
  ReducedModel& m = f.model;
  {
    auto ss = r.keyword("dimension");
    m.dimension = r.value<int>(ss, "dimension");
    if (m.dimension != 1 && m.dimension != 2) r.fail("dimension must be 1 or 2");
  }
  {
    auto ss = r.keyword("accelerator");
    f.accelerator = parse_accelerator(r.value<std::string>(ss, "accelerator"));
  }
  {
    auto ss = r.keyword("ls_degree");
    m.ls_degree = r.value<int>(ss, "degree");
  }
  {
    auto ss = r.keyword("spectral_ratio");
    m.spectral_ratio = r.value<double>(ss, "spectral ratio");
  }
  {
    auto ss = r.keyword("exhausted");
    m.exhausted = r.value<int>(ss, "flag") != 0;
  }
  {
    auto ss = r.keyword("samples");
    const auto n = r.value<std::size_t>(ss, "sample count");
    for (std::size_t i = 0; i < n; ++i) {
      std::istringstream row(r.line());
      const double a = r.value<double>(row, "sample");
      if (m.dimension == 1) {
        m.samples.push_back(Direction::slab(a));
      } else {
        const double x = r.value<double>(row, "sample x");
        const double y = r.value<double>(row, "sample y");
        try {
          m.samples.push_back(Direction::planar(a, x, y));
        } catch (const std::invalid_argument& e) {
          r.fail(e.what());
        }
      }
    }
  }
  m.rho = r.vector("rho");
  m.singular_values = r.vector("singular_values");
  m.basis = r.matrix("basis");
  m.right_factors = r.matrix("right_factors");
  if (m.basis.cols() != m.singular_values.size() || m.right_factors.cols() != m.singular_values.size() ||
      m.basis.rows() != m.rho.size())
    r.fail("inconsistent basis dimensions");
  {
    auto ss = r.keyword("history");
    const auto n = r.value<std::size_t>(ss, "history length");
    for (std::size_t i = 0; i < n; ++i) {
      std::istringstream row(r.line());
      GreedyStep h;
      h.iteration = r.value<int>(row, "iteration");
      h.spectral_ratio = r.value<double>(row, "spectral ratio");
      h.basis_rank = r.value<int>(row, "rank");
      h.selected = make_direction(m.dimension, r.value<double>(row, "direction"));
      for (const auto& d : m.samples)
        if (direction_value(d) == direction_value(h.selected)) h.selected = d;
      h.indicator = r.value<double>(row, "indicator");
      h.counterpart_added = r.value<int>(row, "flag") != 0;
      h.ls_degree = r.value<int>(row, "degree");
      h.sasi_iterations = r.value<int>(row, "iterations");
      m.history.push_back(h);
    }
  }
  if (r.line() != "end") r.fail("expected 'end'");
  return f;
}

ProblemSpec model_problem(const ModelFile& file) {
  if (!file.example_tag.empty()) return build_example(parse_example_id(file.example_tag), file.scattering);
  return parse_problem_config(file.config_text);
}

}  // namespace rtrb
