#include "mpsdp/epsnet.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "mpsdp/errors.hpp"
#include "mpsdp/mps.hpp"
#include "mpsdp/parallel.hpp"

namespace mpsdp {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw RangeError("grid spacing delta must lie in (0, 0.5], got " + std::to_string(delta));
  }
}

/// Quantized copy of a matrix used to collapse identical outputs.
std::vector<long long> dedup_key(const MatrixXc& m) {
  std::vector<long long> key;
  key.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      key.push_back(std::llround(m(r, c).real() * 1e9));
      key.push_back(std::llround(m(r, c).imag() * 1e9));
    }
  }
  return key;
}

}  // namespace

GridParams::GridParams(double d) : delta(d) { check_delta(d); }

std::vector<double> real_grid(double delta) {
  check_delta(delta);
  // Guard the ceiling against representation error in 1 / (2 delta).
  const long long top = static_cast<long long>(std::ceil(1.0 / (2.0 * delta) - 1e-9)) - 2;
  std::vector<double> grid;
  for (long long j = 0; j <= top; ++j) grid.push_back(static_cast<double>(2 * j + 1) * delta);
  grid.push_back(1.0 - delta);
  return grid;
}

std::vector<cplx> complex_grid(double delta) {
  const auto r = real_grid(delta);
  std::vector<cplx> grid;
  grid.reserve(r.size() * r.size());
  for (double x : r)
    for (double y : r) grid.push_back(std::polar(x, 2.0 * std::numbers::pi * y));
  return grid;
}

double complex_grid_covering_radius(double delta, std::size_t samples) {
  const auto grid = complex_grid(delta);
  double worst = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double radius = static_cast<double>(i) / static_cast<double>(samples);
    for (std::size_t k = 0; k < 4 * samples; ++k) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / (4.0 * samples);
      const cplx c = std::polar(radius, phase);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& g : grid) best = std::min(best, std::abs(c - g));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

namespace pipeline {

MatrixXc round_to_grid(const MatrixXc& a, const std::vector<cplx>& grid) {
  if (grid.empty()) throw RangeError("empty grid");
  MatrixXc x(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      std::size_t best = 0;
      double best_dist = std::abs(a(r, c) - grid[0]);
      for (std::size_t g = 1; g < grid.size(); ++g) {
        const double dist = std::abs(a(r, c) - grid[g]);
        if (dist < best_dist) {
          best_dist = dist;
          best = g;
        }
      }
      x(r, c) = grid[best];
    }
  }
  return x;
}

double row_distance(const MatrixXc& a, const MatrixXc& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("row_distance: shapes differ");
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) worst = std::max(worst, (a.row(r) - b.row(r)).norm());
  return worst;
}

bool norm_filter(const MatrixXc& x, double delta) {
  const double slack = 2.0 * std::sqrt(static_cast<double>(x.cols())) * delta;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double nr = x.row(r).norm();
    if (nr < 1.0 - slack || nr > 1.0 + slack) return false;
  }
  return true;
}

MatrixXc normalize_rows(const MatrixXc& x) {
  MatrixXc y = x;
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double nr = y.row(r).norm();
    if (nr == 0.0) throw NumericalError("cannot normalize a zero row");
    y.row(r) /= nr;
  }
  return y;
}

double max_row_overlap(const MatrixXc& y) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = i + 1; j < y.rows(); ++j)
      worst = std::max(worst, std::abs(y.row(i).dot(y.row(j))));
  return worst;
}

bool overlap_filter(const MatrixXc& y, double delta) {
  return max_row_overlap(y) <= 9.0 * std::sqrt(static_cast<double>(y.cols())) * delta;
}

std::optional<MatrixXc> gram_schmidt_rows(const MatrixXc& y) {
  MatrixXc z = y;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double original = z.row(i).norm();
    // A second projection pass restores orthogonality lost to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const cplx overlap = z.row(j).dot(z.row(i));
        z.row(i) -= overlap * z.row(j);
      }
    }
    const double nr = z.row(i).norm();
    if (!(nr > 1e-8 * std::max(original, 1e-300))) return std::nullopt;
    z.row(i) /= nr;
  }
  return z;
}

}  // namespace pipeline

OrthonormalFamily orthonormal_family(std::size_t a, std::size_t b, double delta,
                                     bool real_nonneg, double cap, unsigned threads) {
  check_delta(delta);
  if (a == 0 || b == 0) throw RangeError("matrix dimensions must be positive");
  if (a > b) {
    throw RangeError("cannot have " + std::to_string(a) + " orthonormal rows in dimension " +
                     std::to_string(b));
  }
  if (real_nonneg && a != 1) throw RangeError("real nonnegative nets need a single row");

  std::vector<cplx> grid;
  if (real_nonneg) {
    for (double x : real_grid(delta)) grid.emplace_back(x, 0.0);
  } else {
    grid = complex_grid(delta);
  }
  const std::size_t g = grid.size();
  const std::size_t entries = a * b;
  const double count = std::pow(static_cast<double>(g), static_cast<double>(entries));

  OrthonormalFamily fam;
  fam.a = a;
  fam.b = b;
  fam.delta = delta;
  fam.real_nonneg = real_nonneg;
  fam.nu_cert = GridParams(delta).nu_cert(b);
  fam.stats.candidates = count;
  if (count > cap) {
    throw InfeasibleError("candidate count |grid|^(ab) = " + std::to_string(g) + "^" +
                          std::to_string(entries) + " exceeds the cap " + std::to_string(cap));
  }
  const auto total = static_cast<std::size_t>(std::llround(count));

  struct Chunk {
    std::vector<MatrixXc> out;
    std::size_t after_norm = 0, after_overlap = 0, degenerate = 0;
  };
  if (threads == 0) threads = default_threads();
  const std::size_t chunk_count = std::min<std::size_t>(total, std::max<std::size_t>(1, threads * 8));
  const std::size_t chunk_len = (total + chunk_count - 1) / chunk_count;
  std::vector<Chunk> chunks(chunk_count);

  parallel_for(chunk_count, threads, [&](std::size_t ci) {
    Chunk& ch = chunks[ci];
    const std::size_t begin = ci * chunk_len;
    const std::size_t end = std::min(total, begin + chunk_len);
    MatrixXc x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::size_t rest = idx;
      for (std::size_t e = entries; e-- > 0;) {
        x(static_cast<Eigen::Index>(e / b), static_cast<Eigen::Index>(e % b)) = grid[rest % g];
        rest /= g;
      }
      if (!pipeline::norm_filter(x, delta)) continue;
      ++ch.after_norm;
      const MatrixXc y = pipeline::normalize_rows(x);
      if (!pipeline::overlap_filter(y, delta)) continue;
      ++ch.after_overlap;
      auto z = pipeline::gram_schmidt_rows(y);
      if (!z) {
        ++ch.degenerate;
        continue;
      }
      ch.out.push_back(std::move(*z));
    }
  });

  std::set<std::vector<long long>> seen;
  for (auto& ch : chunks) {
    fam.stats.after_norm_filter += ch.after_norm;
    fam.stats.after_overlap_filter += ch.after_overlap;
    fam.stats.degenerate += ch.degenerate;
    for (auto& m : ch.out) {
      if (!seen.insert(dedup_key(m)).second) {
        ++fam.stats.duplicates;
        continue;
      }
      fam.matrices.push_back(std::move(m));
    }
  }
  return fam;
}

BoundaryNet build_end_net(std::size_t D, std::size_t d_end, double delta, double cap,
                          unsigned threads) {
  if (D > d_end) {
    throw RangeError("boundary net needs D <= d_end, got D = " + std::to_string(D) +
                     ", d_end = " + std::to_string(d_end));
  }
  const auto fam = orthonormal_family(D, d_end, delta, false, cap, threads);
  if (fam.matrices.empty()) throw NumericalError("boundary net is empty at this delta");
  BoundaryNet net;
  net.delta = delta;
  net.nu_cert = fam.nu_cert;
  for (const auto& m : fam.matrices) net.tensors.push_back(Tensor::from_matrix(m));
  return net;
}

double pair_net_epsilon_cert(std::size_t D, std::size_t d, double delta) {
  return 2.0 * GridParams(delta).nu_cert(d * D);
}

PairNet build_pair_net(std::size_t D, std::size_t d, double delta,
                       std::optional<double> epsilon_op, double cap, unsigned threads) {
  if (D == 0 || d == 0) throw RangeError("dimensions must be positive");
  PairNet net;
  net.D = D;
  net.d = d;
  net.delta = delta;
  net.epsilon_cert = pair_net_epsilon_cert(D, d, delta);
  net.epsilon_op = epsilon_op.value_or(net.epsilon_cert);
  if (!(net.epsilon_op > 0.0)) throw RangeError("epsilon_op must be positive");

  const auto lam_fam = orthonormal_family(1, D, delta, true, cap, threads);
  const auto b_fam = orthonormal_family(D, d * D, delta, false, cap, threads);
  net.nu_cert_lambda = lam_fam.nu_cert;
  net.nu_cert_b = b_fam.nu_cert;
  net.b_net_size = b_fam.matrices.size();
  for (const auto& m : lam_fam.matrices) {
    std::vector<double> lam(D);
    for (std::size_t k = 0; k < D; ++k) lam[k] = std::max(0.0, m(0, static_cast<Eigen::Index>(k)).real());
    net.lambdas.push_back(std::move(lam));
  }
  std::vector<Tensor> bs;
  bs.reserve(b_fam.matrices.size());
  for (const auto& m : b_fam.matrices) bs.push_back(Tensor::from_matrix(m).reshaped({D, d, D}));

  const double threshold = 3.0 * net.epsilon_op;
  for (std::size_t li = 0; li < net.lambdas.size(); ++li) {
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      if (left_overlap_residual(net.lambdas[li], bs[bi]) > threshold) {
        ++net.discarded;
        continue;
      }
      NetPair p;
      p.lambda = net.lambdas[li];
      p.b = bs[bi];
      p.mu = mu_of(p.lambda, p.b);
      p.lambda_index = li;
      p.b_index = bi;
      net.pairs.push_back(std::move(p));
    }
  }
  if (net.pairs.empty()) {
    throw NumericalError("pair net is empty: epsilon_op = " + std::to_string(net.epsilon_op) +
                         " is too small for delta = " + std::to_string(delta));
  }
  return net;
}

NetSizeEstimate net_size_estimate(std::size_t D, std::size_t d, double epsilon) {
  if (!(epsilon > 0.0)) throw RangeError("epsilon must be positive");
  NetSizeEstimate est;
  est.base = 144.0 * static_cast<double>(d * D) / epsilon;
  const std::size_t exponent = D + 2 * d * D * D;
  est.exponent = static_cast<double>(exponent);
  est.log10 = est.exponent * std::log10(est.base);
  if (est.base == std::floor(est.base) && est.log10 < 19.0) {
    unsigned __int128 value = 1;
    const auto base = static_cast<unsigned long long>(est.base);
    bool fits = true;
    for (std::size_t k = 0; k < exponent && fits; ++k) {
      value *= base;
      fits = value <= std::numeric_limits<unsigned long long>::max();
    }
    if (fits) est.exact = static_cast<unsigned long long>(value);
  }
  return est;
}

}  // namespace mpsdp
