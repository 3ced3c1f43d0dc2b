/**
 * @file study.hpp
 * @brief Study configuration, single-level solves, refinement studies and
 * their CSV / text / SVG reports.
 *
 * Configuration files are flat `key = value` lines. Strings are double
 * quoted, numbers are bare, `#` starts a comment. Recognized keys:
 * a11, a12, a21, a22, c, u_exact, f, g, h0_denominator, levels, solver, tol, seed.
 */
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fvem/analysis.hpp"
#include "fvem/assembly.hpp"
#include "fvem/expr.hpp"
#include "fvem/mesh.hpp"
#include "fvem/problem.hpp"

namespace fvem {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StudyConfig {
  std::string a11 = "1", a12 = "0", a21 = "0", a22 = "1";
  std::string c = "0";
  std::optional<std::string> u_exact;
  std::optional<std::string> f;
  std::string g = "0";
  std::size_t h0_denominator = 4;
  std::size_t levels = 1;
  linalg::Method solver = linalg::Method::automatic;
  double tol = 1e-12;
  std::uint64_t seed = 42;
  QuadratureOrders orders;

  void validate() const {
    if (levels < 1) throw ConfigError("levels must be at least 1");
    if (h0_denominator < 1) throw ConfigError("h0_denominator must be a positive integer");
    if (!u_exact && !f) throw ConfigError("either u_exact or f must be given");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string config_string(std::string_view v, const std::string& key, std::size_t line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw ConfigError("line " + std::to_string(line) + ": value of '" + key + "' must be a quoted string");
  return std::string(v.substr(1, v.size() - 2));
}

template <class T>
T config_number(std::string_view v, const std::string& key, std::size_t line) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line) + ": value of '" + key + "' must be a bare number");
  return out;
}

}  // namespace detail

inline StudyConfig parse_config(std::string_view text) {
  StudyConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    // '#' outside a quoted string starts a comment
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      if (line[k] == '#' && !quoted) {
        line = line.substr(0, k);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    if (!seen.emplace(key, line_no).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

    if (key == "a11") cfg.a11 = detail::config_string(val, key, line_no);
    else if (key == "a12") cfg.a12 = detail::config_string(val, key, line_no);
    else if (key == "a21") cfg.a21 = detail::config_string(val, key, line_no);
    else if (key == "a22") cfg.a22 = detail::config_string(val, key, line_no);
    else if (key == "c") cfg.c = detail::config_string(val, key, line_no);
    else if (key == "u_exact") cfg.u_exact = detail::config_string(val, key, line_no);
    else if (key == "f") cfg.f = detail::config_string(val, key, line_no);
    else if (key == "g") cfg.g = detail::config_string(val, key, line_no);
    else if (key == "h0_denominator") cfg.h0_denominator = detail::config_number<std::size_t>(val, key, line_no);
    else if (key == "levels") cfg.levels = detail::config_number<std::size_t>(val, key, line_no);
    else if (key == "solver") {
      try {
        cfg.solver = linalg::parse_method(detail::config_string(val, key, line_no));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
      }
    } else if (key == "tol") cfg.tol = detail::config_number<double>(val, key, line_no);
    else if (key == "seed") cfg.seed = detail::config_number<std::uint64_t>(val, key, line_no);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Problem data from expression strings. An explicit f takes precedence
/// over the source manufactured from u_exact.
inline ProblemData problem_from_config(const StudyConfig& cfg) {
  const auto parse = [](const std::string& what, const std::string& text) {
    try {
      return expr::parse(text);
    } catch (const expr::ParseError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  };
  ProblemData p;
  p.a11 = parse("a11", cfg.a11);
  p.a12 = parse("a12", cfg.a12);
  p.a21 = parse("a21", cfg.a21);
  p.a22 = parse("a22", cfg.a22);
  p.c = parse("c", cfg.c);
  p.g = parse("g", cfg.g);
  if (cfg.u_exact) attach_exact_solution(p, parse("u_exact", *cfg.u_exact), !cfg.f.has_value());
  if (cfg.f) p.f = parse("f", *cfg.f);
  return p;
}

struct LevelResult {
  LevelErrors errors;
  NodalField solution;
};

inline LevelResult run_level(const ProblemData& prob, std::size_t n, const StudyConfig& cfg) {
  const MeshPtr mesh = share(uniform_mesh(n));
  const FveSystem sys = assemble_fve(mesh, prob, cfg.orders);
  linalg::SolveOptions opts;
  opts.method = cfg.solver;
  opts.tol = cfg.tol;
  DiscreteSolution sol = solve_system(sys, opts);

  LevelErrors le;
  le.n = n;
  le.h = mesh->h();
  le.dof = sys.size();
  le.solve = sol.report;
  if (prob.has_exact()) {
    le.stress = superconv_error(sol.field, prob, stress_points(*mesh));
    const ErrorNorms en = error_norms(sol.field, prob, cfg.orders.norm);
    le.e_l2 = en.l2;
    le.e_h1 = en.h1;
    le.e_inf = en.inf;
    le.e_close = supercloseness(sol.field, prob, cfg.orders.norm);
  }
  return {le, std::move(sol.field)};
}

class StudyAborted : public std::runtime_error {
 public:
  StudyAborted(const std::string& what, StudyReport partial) : std::runtime_error(what), partial(std::move(partial)) {}
  StudyReport partial;
};

/// Runs levels n0, 2 n0, 4 n0, ...; `on_level` sees each finished level.
inline StudyReport run_study(const StudyConfig& cfg, const std::function<void(const LevelErrors&)>& on_level = {}) {
  cfg.validate();
  const ProblemData prob = problem_from_config(cfg);
  StudyReport rep;
  std::size_t n = cfg.h0_denominator;
  for (std::size_t k = 0; k < cfg.levels; ++k, n *= 2) {
    try {
      rep.levels.push_back(run_level(prob, n, cfg).errors);
    } catch (const std::exception& e) {
      throw StudyAborted("level " + std::to_string(k) + " (n = " + std::to_string(n) + ") failed: " + e.what(), rep);
    }
    if (on_level) on_level(rep.levels.back());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reporting

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

inline std::string format_rate(std::optional<double> r) {
  if (!r) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *r);
  return buf;
}

inline std::string format_opt(std::optional<double> v) { return v ? format_double(*v) : std::string{}; }

inline constexpr std::string_view csv_header =
    "h,dof,e_S,rate_S,e_L2,rate_L2,e_H1,rate_H1,e_close,rate_close,e_inf,rate_inf,iters,seconds";

/// CSV in the fixed column order. The seconds column is filled only when
/// `with_timing` is set, so the default output is byte-for-byte reproducible.
inline void write_csv(const StudyReport& rep, std::ostream& os, bool with_timing = false) {
  os << csv_header << '\n';
  static constexpr std::array<ErrorColumn, 5> cols{ErrorColumn::stress, ErrorColumn::l2, ErrorColumn::h1,
                                                   ErrorColumn::close, ErrorColumn::inf};
  for (std::size_t k = 0; k < rep.levels.size(); ++k) {
    const LevelErrors& l = rep.levels[k];
    os << format_double(l.h) << ',' << l.dof;
    for (const ErrorColumn c : cols) os << ',' << format_opt(column_value(l, c)) << ',' << format_rate(rep.rate(c, k));
    os << ',' << l.solve.iterations << ',';
    if (with_timing) os << format_double(l.solve.seconds);
    os << '\n';
  }
}

inline void write_table(const StudyReport& rep, std::ostream& os) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%6s %8s %11s %8s %11s %8s %11s %8s %11s %8s %8s %9s\n", "h", "dof", "e_S", "rate",
                "e_L2", "rate", "e_H1", "rate", "e_close", "rate", "solver", "seconds");
  os << buf;
  const auto num = [](std::optional<double> v) {
    char b[32];
    if (!v) return std::string("-");
    std::snprintf(b, sizeof b, "%.4e", *v);
    return std::string(b);
  };
  const auto rate = [](std::optional<double> v) { return v ? format_rate(v) : std::string("--"); };
  for (std::size_t k = 0; k < rep.levels.size(); ++k) {
    const LevelErrors& l = rep.levels[k];
    const std::string h = "1/" + std::to_string(l.n);
    std::snprintf(buf, sizeof buf, "%6s %8zu %11s %8s %11s %8s %11s %8s %11s %8s %8s %9.3f\n", h.c_str(), l.dof,
                  num(l.e_s()).c_str(), rate(rep.rate(ErrorColumn::stress, k)).c_str(), num(l.e_l2).c_str(),
                  rate(rep.rate(ErrorColumn::l2, k)).c_str(), num(l.e_h1).c_str(),
                  rate(rep.rate(ErrorColumn::h1, k)).c_str(), num(l.e_close).c_str(),
                  rate(rep.rate(ErrorColumn::close, k)).c_str(), linalg::to_string(l.solve.method), l.solve.seconds);
    os << buf;
  }
}

/// Self-contained log-log plot of the error columns against h with a
/// slope-2 reference line.
inline void write_svg(const StudyReport& rep, std::ostream& os) {
  constexpr double W = 640, H = 480, L = 70, R = 150, T = 30, B = 60;
  struct Series {
    const char* name;
    ErrorColumn col;
    const char* color;
  };
  const std::array<Series, 5> series{{{"e_S", ErrorColumn::stress, "#d62728"},
                                      {"e_L2", ErrorColumn::l2, "#1f77b4"},
                                      {"e_H1", ErrorColumn::h1, "#2ca02c"},
                                      {"e_close", ErrorColumn::close, "#9467bd"},
                                      {"e_inf", ErrorColumn::inf, "#8c564b"}}};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& l : rep.levels) {
    xmin = std::min(xmin, std::log10(l.h));
    xmax = std::max(xmax, std::log10(l.h));
    for (const auto& s : series)
      if (auto v = column_value(l, s.col); v && *v > 0) {
        ymin = std::min(ymin, std::log10(*v));
        ymax = std::max(ymax, std::log10(*v));
      }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
    xmin = -2, xmax = 0, ymin = -4, ymax = 0;
  }
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  xmin -= 0.05 * (xmax - xmin);
  xmax += 0.05 * (xmax - xmin);
  ymin -= 0.05 * (ymax - ymin);
  ymax += 0.05 * (ymax - ymin);
  const auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  const auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                W - L - R, H - T - B);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-size=\"13\">log10 h</text>\n",
                L + 0.5 * (W - L - R), H - 20);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"20\" y=\"%g\" font-size=\"13\" transform=\"rotate(-90 20 %g)\" "
                "text-anchor=\"middle\">log10 error</text>\n",
                T + 0.5 * (H - T - B), T + 0.5 * (H - T - B));
  os << buf;
  for (int t = static_cast<int>(std::ceil(xmin)); t <= static_cast<int>(std::floor(xmax)); ++t) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%g\" text-anchor=\"middle\" font-size=\"11\">%d</text>\n",
                  px(t), H - B + 15, t);
    os << buf;
  }
  for (int t = static_cast<int>(std::ceil(ymin)); t <= static_cast<int>(std::floor(ymax)); ++t) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%d</text>\n", L - 6,
                  py(t) + 4, t);
    os << buf;
  }
  // slope-2 reference through the first e_S (or first available) point
  if (!rep.levels.empty()) {
    std::optional<double> anchor;
    for (const auto& s : series)
      if ((anchor = column_value(rep.levels.front(), s.col)) && *anchor > 0) break;
    if (anchor && *anchor > 0) {
      const double x0 = std::log10(rep.levels.front().h);
      const double x1 = std::log10(rep.levels.back().h);
      const double y0 = std::log10(*anchor) + 0.3;
      const double y1 = y0 + 2.0 * (x1 - x0);
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n",
                    px(x0), py(y0), px(x1), py(y1));
      os << buf;
    }
  }
  double legend_y = T + 15;
  for (const auto& s : series) {
    std::string pts;
    for (const auto& l : rep.levels)
      if (auto v = column_value(l, s.col); v && *v > 0) {
        std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(std::log10(l.h)), py(std::log10(*v)));
        pts += buf;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", px(std::log10(l.h)),
                      py(std::log10(*v)), s.color);
        os << buf;
      }
    if (pts.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"" << pts << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"%s\">%s</text>\n", W - R + 12,
                  legend_y, s.color, s.name);
    os << buf;
    legend_y += 18;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"gray\">slope 2</text>\n", W - R + 12,
                legend_y);
  os << buf;
  os << "</svg>\n";
}

/// Nodal solution table: node, x, y, u_h and, when known, u_exact.
inline void write_solution_csv(const NodalField& uh, const ProblemData& prob, std::ostream& os) {
  os << "node,x,y,u_h" << (prob.has_exact() ? ",u_exact" : "") << '\n';
  for (std::size_t n = 0; n < uh.mesh().num_nodes(); ++n) {
    const Point p = uh.mesh().node_point(n);
    os << n << ',' << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(uh[n]);
    if (prob.has_exact()) os << ',' << format_double((*prob.u_exact)(p.x, p.y));
    os << '\n';
  }
}

}  // namespace fvem
