#include "boxcouple/boxspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "boxcouple/errors.hpp"
#include "boxcouple/spectral.hpp"

namespace boxcouple::box {

std::size_t BoxSpace::total_points() const {
  std::size_t total = 0;
  for (const auto& q : chain.quotients) total += q->order();
  return total;
}

std::int64_t BoxSpace::distance(Point a, Point b) const {
  const auto& qa = chain.level(a.level);
  const auto& qb = chain.level(b.level);
  if (a.element >= qa.order() || b.element >= qb.order()) throw ValidationError("box-space point out of range");
  if (a.level == b.level) return groups::word_metric(qa, a.element, b.element);
  return qa.distance_from_identity(qa.inverse(a.element)) + std::llabs(anchors[a.level - 1] - anchors[b.level - 1]) +
         qb.distance_from_identity(b.element);
}

FiniteMetricSpace BoxSpace::to_metric_space() const {
  std::vector<Point> points;
  std::vector<std::string> labels;
  for (std::size_t n = 1; n <= chain.depth(); ++n) {
    const auto& q = chain.level(n);
    for (std::size_t x = 0; x < q.order(); ++x) {
      points.push_back({n, x});
      labels.push_back(std::to_string(n) + ":" + format_key(q.key(x)));
    }
  }
  const std::size_t total = points.size();
  std::vector<double> m(total * total);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) m[i * total + j] = static_cast<double>(distance(points[i], points[j]));
  }
  return FiniteMetricSpace(std::move(labels), std::move(m), false);
}

BoxSpace assemble(groups::NormalChain chain) {
  if (chain.quotients.empty()) throw ValidationError("box space needs a nonempty chain");
  BoxSpace box;
  for (const auto& q : chain.quotients) box.diameters.push_back(q->diameter());
  box.anchors.push_back(0);
  for (std::size_t i = 1; i < box.diameters.size(); ++i) {
    box.anchors.push_back(box.anchors.back() + box.diameters[i - 1] + box.diameters[i] + 1);
  }
  box.chain = std::move(chain);
  return box;
}

GraphDiagnostics diagnostics(const groups::FiniteQuotient& q, const DiagnosticsOptions& options) {
  GraphDiagnostics out;
  out.level = q.level();
  out.order = q.order();
  out.diameter = q.diameter();
  auto cayley = spectral::cayley_graph(q);
  const auto& g = cayley.graph;
  out.degree = g.order() ? g.adj.front().size() : 0;
  out.multi_edges_collapsed = cayley.multi_edges_collapsed;
  auto girth = spectral::girth_through_root(g);
  out.girth = girth.length;
  out.girth_infinite = girth.infinite;

  if (out.order < 2) {
    out.lambda_method = "trivial";
    out.lambda1 = 0.0;
    out.note = "single vertex: spectral gap and Cheeger constant are vacuous";
    return out;
  }

  double sweep = spectral::ball_sweep_conductance(g);
  if (out.order <= options.dense_limit) {
    auto spectrum = spectral::normalized_laplacian_spectrum(g);
    out.lambda1 = spectrum[1];
    out.lambda_method = "dense";
  } else if (out.order <= options.eigen_budget) {
    auto lanczos = spectral::lanczos_gap(g);
    out.lambda_method = "lanczos";
    out.residual = lanczos.residual;
    if (lanczos.converged) {
      out.lambda1 = lanczos.lambda1;
    } else {
      out.degraded = true;
      out.note = "iterative eigensolver did not reach residual 1e-9";
    }
  } else {
    out.degraded = true;
    out.lambda_method = "bounds";
    out.note = "order " + std::to_string(out.order) + " exceeds the eigen-solver budget of " +
               std::to_string(options.eigen_budget) + "; lambda1 reported as bounds only";
  }

  if (out.lambda1) {
    out.lambda1_lo = out.lambda1_hi = *out.lambda1;
  } else {
    double volume = static_cast<double>(g.volume());
    out.lambda1_lo = 1.0 / (static_cast<double>(std::max(out.diameter, 1)) * volume);
    out.lambda1_hi = std::min(2.0, 2.0 * sweep);
  }

  if (out.order <= options.cheeger_exact_limit) {
    auto h = spectral::exact_cheeger(g);
    out.cheeger_exact = true;
    out.cheeger_num = h.boundary;
    out.cheeger_den = h.volume;
    out.cheeger_lo = out.cheeger_hi = h.value();
  } else {
    out.cheeger_lo = out.lambda1_lo / 2.0;
    out.cheeger_hi = std::min(std::sqrt(2.0 * out.lambda1_hi), sweep);
  }
  return out;
}

ExpanderReport expander_report(const groups::NormalChain& chain, const DiagnosticsOptions& options) {
  if (chain.quotients.empty()) throw ValidationError("expander report needs a nonempty chain");
  ExpanderReport report;
  report.family = chain.family;
  report.caveat = kExpanderCaveat;
  report.levels.resize(chain.depth());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < chain.depth(); ++i) {
    try {
      report.levels[i] = diagnostics(*chain.quotients[i], options);
    } catch (const Error& e) {
      GraphDiagnostics failed;
      failed.level = i + 1;
      failed.order = chain.quotients[i]->order();
      failed.degraded = true;
      failed.lambda_method = "failed";
      failed.note = e.what();
      report.levels[i] = failed;
    }
  }
  for (const auto& row : report.levels) {
    if (row.lambda1 && row.order > 1 && (!report.min_lambda1 || *row.lambda1 < *report.min_lambda1)) {
      report.min_lambda1 = row.lambda1;
      report.min_level = row.level;
    }
  }
  return report;
}

namespace {
std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv(const ExpanderReport& report) {
  std::ostringstream out;
  out << "# " << report.caveat << "\n";
  out << "level,order,degree,diameter,girth,lambda1,cheeger_lo,cheeger_hi\n";
  for (const auto& row : report.levels) {
    out << row.level << ',' << row.order << ',' << row.degree << ',' << row.diameter << ','
        << (row.girth_infinite ? std::string("inf") : std::to_string(row.girth)) << ','
        << (row.lambda1 ? number(*row.lambda1) : std::string()) << ',' << number(row.cheeger_lo) << ','
        << number(row.cheeger_hi) << '\n';
  }
  return out.str();
}

}  // namespace boxcouple::box
