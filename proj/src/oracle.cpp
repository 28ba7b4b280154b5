#include "mpsdp/oracle.hpp"

#include <limits>
#include <string>

#include "mpsdp/errors.hpp"
#include "mpsdp/parallel.hpp"

namespace mpsdp {

GroundTruth exact_ground(const NnHamiltonian& h) {
  const MatrixXc dense = to_dense_hamiltonian(h);
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(dense);
  if (eig.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  GroundTruth g;
  g.spectrum = eig.eigenvalues();
  g.e0 = g.spectrum(0);
  g.ground_vector = eig.eigenvectors().col(0);
  g.degeneracy = 0;
  g.gap = 0.0;
  for (Eigen::Index k = 0; k < g.spectrum.size(); ++k) {
    if (g.spectrum(k) - g.e0 <= 1e-9) {
      ++g.degeneracy;
    } else {
      g.gap = g.spectrum(k) - g.e0;
      break;
    }
  }
  return g;
}

namespace {

struct Search {
  const NnHamiltonian& h;
  const BoundaryNet& ends;
  const PairNet& net;
  double epsilon_op;
  std::vector<std::vector<std::size_t>> successors;  ///< stitched successors per pair

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> path;
  std::vector<std::size_t> best_path;
  std::size_t best_right = 0;
  double scored = 0.0;

  // path holds pairs for sites 2..depth+1; energy includes every window so far.
  void descend(double energy) {
    const std::size_t n = h.n;
    const std::size_t here = path.back();
    const NetPair& pair = net.pairs[here];
    if (path.size() == n - 2) {
      for (std::size_t g = 0; g < ends.size(); ++g) {
        const double e = energy + detail::window_right(pair.lambda, pair.b, ends.tensors[g], h.terms[n - 2]);
        scored += 1.0;
        if (e < best) {
          best = e;
          best_path = path;
          best_right = g;
        }
      }
      return;
    }
    const MatrixXc& term = h.terms[path.size()];
    for (std::size_t next : successors[here]) {
      const double e = energy + detail::window_interior(pair.lambda, pair.b, net.pairs[next].b, term);
      path.push_back(next);
      descend(e);
      path.pop_back();
    }
  }
};

}  // namespace

EnumerationResult enumerate_net_optimum(const NnHamiltonian& h, const BoundaryNet& ends,
                                        const PairNet& net, double epsilon_op, unsigned threads,
                                        double max_sequences) {
  require_solver_layout(h, net.D);
  for (const auto& t : h.terms) detail::require_hermitian(t);
  const std::size_t N = net.size();

  std::vector<std::vector<std::size_t>> successors(N);
  for (std::size_t q = 0; q < N; ++q)
    for (std::size_t p = 0; p < N; ++p)
      if (stitches(net.pairs[q].mu, net.pairs[p].lambda, epsilon_op)) successors[q].push_back(p);

  // Count admissible sequences before searching.
  std::vector<double> count(N, static_cast<double>(ends.size()));
  for (std::size_t j = 3; j <= h.n - 1; ++j) {
    std::vector<double> next(N, 0.0);
    for (std::size_t q = 0; q < N; ++q)
      for (std::size_t p : successors[q]) next[p] += count[q];
    count = std::move(next);
  }
  double total = 0.0;
  for (double c : count) total += c * static_cast<double>(ends.size());
  if (total > max_sequences) {
    throw InfeasibleError("enumeration would score " + std::to_string(total) +
                          " sequences, above the guard " + std::to_string(max_sequences));
  }

  EnumerationResult res;
  if (total == 0.0) return res;

  struct Best {
    double energy = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> path;
    std::size_t right = 0;
    double scored = 0.0;
  };
  std::vector<Best> per_left(ends.size());
  parallel_for(ends.size(), threads, [&](std::size_t g) {
    Search s{h, ends, net, epsilon_op, successors, std::numeric_limits<double>::infinity(), {}, {}, 0, 0.0};
    for (std::size_t p = 0; p < N; ++p) {
      const NetPair& pair = net.pairs[p];
      const double e = detail::window_left(ends.tensors[g], pair.lambda, pair.b, h.terms[0]);
      s.path.assign(1, p);
      s.descend(e);
    }
    per_left[g] = Best{s.best, s.best_path, s.best_right, s.scored};
  });

  std::size_t winner = ends.size();
  for (std::size_t g = 0; g < ends.size(); ++g) {
    res.sequences += per_left[g].scored;
    if (per_left[g].path.empty()) continue;
    if (winner == ends.size() || per_left[g].energy < per_left[winner].energy) winner = g;
  }
  if (winner == ends.size()) return res;
  res.feasible = true;
  res.e_alg_min = per_left[winner].energy;
  res.assignment.gamma_left = winner;
  res.assignment.pairs = per_left[winner].path;
  res.assignment.gamma_right = per_left[winner].right;
  return res;
}

namespace {

constexpr std::size_t kBaselineDenseLimit = std::size_t{1} << 14;

/// Dense prefix states: rows index the physical configurations of sites
/// [0, k), columns the bond to site k.
MatrixXc left_block(const MpsChain& c, std::size_t k) {
  MatrixXc block = MatrixXc::Ones(1, 1);
  for (std::size_t j = 0; j < k; ++j) {
    const Tensor& a = c.sites[j];
    const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
    MatrixXc next(block.rows() * static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
    for (Eigen::Index x = 0; x < block.rows(); ++x)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t b = 0; b < r; ++b) {
          cplx acc = 0.0;
          for (std::size_t al = 0; al < l; ++al)
            acc += block(x, static_cast<Eigen::Index>(al)) * a[(al * p + i) * r + b];
          next(x * static_cast<Eigen::Index>(p) + static_cast<Eigen::Index>(i),
               static_cast<Eigen::Index>(b)) = acc;
        }
    block = std::move(next);
  }
  return block;
}

/// Dense suffix states: rows index the bond from site k-1, columns the
/// physical configurations of sites [k, n).
MatrixXc right_block(const MpsChain& c, std::size_t k) {
  MatrixXc block = MatrixXc::Ones(1, 1);
  for (std::size_t j = c.size(); j-- > k;) {
    const Tensor& a = c.sites[j];
    const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
    MatrixXc next(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(p) * block.cols());
    for (std::size_t al = 0; al < l; ++al)
      for (std::size_t i = 0; i < p; ++i)
        for (Eigen::Index y = 0; y < block.cols(); ++y) {
          cplx acc = 0.0;
          for (std::size_t b = 0; b < r; ++b)
            acc += a[(al * p + i) * r + b] * block(static_cast<Eigen::Index>(b), y);
          next(static_cast<Eigen::Index>(al), static_cast<Eigen::Index>(i) * block.cols() + y) = acc;
        }
    block = std::move(next);
  }
  return block;
}

}  // namespace

BaselineResult local_sweep_baseline(const NnHamiltonian& h, std::size_t D,
                                    const CanonicalMps& start, std::size_t sweeps) {
  if (h.total_dim() > kBaselineDenseLimit) {
    throw InfeasibleError("local sweep baseline is limited to dimension 2^14");
  }
  if (D == 0) throw RangeError("bond dimension must be positive");
  BaselineResult res;
  res.state = start;
  res.energy = expectation_full(start, h);
  MpsChain chain = to_chain(start);
  const std::size_t n = chain.size();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n; ++k) order.push_back(k);
  for (std::size_t k = n - 1; k-- > 1;) order.push_back(k);

  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t k : order) {
      const Tensor& a = chain.sites[k];
      const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
      const MatrixXc left = left_block(chain, k);       // (P_left, l)
      const MatrixXc right = right_block(chain, k + 1);  // (r, P_right)
      const Eigen::Index pl = left.rows(), pr = right.cols();
      const Eigen::Index dim = pl * static_cast<Eigen::Index>(p) * pr;
      const Eigen::Index m = static_cast<Eigen::Index>(l * p * r);
      // Column c of the embedding is the state with site k set to the c-th unit tensor.
      MatrixXc embed = MatrixXc::Zero(dim, m);
      for (std::size_t al = 0; al < l; ++al)
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t b = 0; b < r; ++b) {
            const auto col = static_cast<Eigen::Index>((al * p + i) * r + b);
            for (Eigen::Index x = 0; x < pl; ++x)
              for (Eigen::Index y = 0; y < pr; ++y)
                embed((x * static_cast<Eigen::Index>(p) + static_cast<Eigen::Index>(i)) * pr + y, col) =
                    left(x, static_cast<Eigen::Index>(al)) * right(static_cast<Eigen::Index>(b), y);
          }
      Eigen::SelfAdjointEigenSolver<MatrixXc> gram(embed.adjoint() * embed);
      const double top = gram.eigenvalues().maxCoeff();
      std::vector<Eigen::Index> keep;
      for (Eigen::Index q = 0; q < m; ++q)
        if (gram.eigenvalues()(q) > 1e-10 * top) keep.push_back(q);
      MatrixXc basis(m, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t q = 0; q < keep.size(); ++q)
        basis.col(static_cast<Eigen::Index>(q)) =
            gram.eigenvectors().col(keep[q]) / std::sqrt(gram.eigenvalues()(keep[q]));
      const MatrixXc w = embed * basis;  // orthonormal columns
      MatrixXc hw(dim, w.cols());
      for (Eigen::Index q = 0; q < w.cols(); ++q) hw.col(q) = apply_hamiltonian(h, w.col(q));
      MatrixXc heff = w.adjoint() * hw;
      heff = 0.5 * (heff + heff.adjoint());
      Eigen::SelfAdjointEigenSolver<MatrixXc> eff(heff);
      const double candidate = eff.eigenvalues()(0);
      if (!(candidate < res.energy - 1e-12)) continue;
      const VectorXc coeffs = basis * eff.eigenvectors().col(0);
      std::vector<cplx> data(coeffs.data(), coeffs.data() + coeffs.size());
      chain.sites[k] = Tensor({l, p, r}, std::move(data));
      const auto canon = canonicalize_chain(chain, D, TruncationMode::truncate, start.s);
      const double e = expectation_full(canon.mps, h);
      if (!(e < res.energy - 1e-12)) {
        chain = to_chain(res.state);
        continue;
      }
      res.state = canon.mps;
      res.energy = e;
      chain = to_chain(res.state);
      ++res.accepted_moves;
    }
    res.sweep_energies.push_back(res.energy);
  }
  return res;
}

}  // namespace mpsdp
