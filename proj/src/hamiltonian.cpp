#include "mpsdp/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "mpsdp/errors.hpp"
#include "mpsdp/linalg.hpp"

namespace mpsdp {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr std::size_t kDenseLimit = std::size_t{1} << 14;

MatrixXc identity(std::size_t n) {
  return MatrixXc::Identity(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(n));
}

double param(const ModelParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void check_param_keys(const std::string& model, const ModelParams& params,
                      std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw RangeError("model " + model + ": unknown parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw RangeError("model " + model + ": parameter '" + key + "' is not finite");
    }
  }
}

std::size_t integer_param(const std::string& model, const ModelParams& params,
                          const std::string& key, std::size_t fallback) {
  const double v = param(params, key, static_cast<double>(fallback));
  if (v < 1 || v != std::floor(v) || v > 64) {
    throw RangeError("model " + model + ": parameter '" + key +
                     "' must be an integer in [1, 64]");
  }
  return static_cast<std::size_t>(v);
}

/// Bond terms from a two-site coupling plus a uniform single-site field.
std::vector<MatrixXc> fold_fields(std::size_t n, const MatrixXc& coupling,
                                  const MatrixXc& field) {
  const auto d = static_cast<std::size_t>(field.rows());
  const MatrixXc id = identity(d);
  std::vector<MatrixXc> terms;
  terms.reserve(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double left_weight = j == 0 ? 1.0 : 0.5;
    const double right_weight = j + 2 == n ? 1.0 : 0.5;
    terms.push_back(coupling + left_weight * kron(field, id) +
                    right_weight * kron(id, field));
  }
  return terms;
}

}  // namespace

std::size_t NnHamiltonian::total_dim() const {
  std::size_t total = 1;
  for (auto dim : dims) {
    if (total > std::numeric_limits<std::size_t>::max() / dim) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= dim;
  }
  return total;
}

NnHamiltonian make_hamiltonian(std::vector<std::size_t> dims,
                               std::vector<MatrixXc> terms, std::size_t s) {
  if (dims.size() < 2) throw RangeError("a chain needs at least two sites");
  if (terms.size() + 1 != dims.size()) {
    throw ShapeError("expected " + std::to_string(dims.size() - 1) +
                     " terms, got " + std::to_string(terms.size()));
  }
  NnHamiltonian h;
  h.n = dims.size();
  h.s = s;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto dim = static_cast<Eigen::Index>(dims[j] * dims[j + 1]);
    if (terms[j].rows() != dim || terms[j].cols() != dim) {
      throw ShapeError("term " + std::to_string(j) + " has shape " +
                       std::to_string(terms[j].rows()) + "x" +
                       std::to_string(terms[j].cols()) + ", expected " +
                       std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!terms[j].allFinite()) {
      throw RangeError("term " + std::to_string(j) + " has non-finite entries");
    }
    if (hermitian_defect(terms[j]) > kHermitianTol) {
      throw RangeError("term " + std::to_string(j) + " is not Hermitian");
    }
  }
  h.dims = std::move(dims);
  h.terms = std::move(terms);
  h.J = max_term_norm(h);
  return h;
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {
      "zz_chain",   "transverse_ising",   "heisenberg",       "random_hermitian",
      "trap_model", "rotated_classical",  "diagonal_commuting"};
  return names;
}

NnHamiltonian build_model(const std::string& name, const ModelParams& params,
                          std::size_t n, std::optional<std::uint64_t> seed) {
  if (n < 2) throw RangeError("model " + name + ": need n >= 2, got " + std::to_string(n));
  std::mt19937_64 rng(seed.value_or(0));
  const MatrixXc x = pauli_x(), y = pauli_y(), z = pauli_z(), id2 = identity(2);
  std::vector<MatrixXc> terms;
  std::size_t d = 2;

  if (name == "zz_chain") {
    check_param_keys(name, params, {"J"});
    terms.assign(n - 1, param(params, "J", 1.0) * kron(z, z));
  } else if (name == "transverse_ising") {
    check_param_keys(name, params, {"J", "g"});
    const double coupling = param(params, "J", 1.0);
    const double g = param(params, "g", 1.0);
    terms = fold_fields(n, -coupling * kron(z, z), -g * x);
  } else if (name == "heisenberg") {
    check_param_keys(name, params, {"J"});
    const double coupling = param(params, "J", 1.0);
    terms.assign(n - 1, coupling * (kron(x, x) + kron(y, y) + kron(z, z)));
  } else if (name == "random_hermitian") {
    check_param_keys(name, params, {"d", "scale"});
    d = integer_param(name, params, "d", 2);
    const double scale = param(params, "scale", 1.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      MatrixXc t = random_hermitian(d * d, rng);
      t *= scale / operator_norm(t);
      terms.push_back(0.5 * (t + t.adjoint()));
    }
  } else if (name == "trap_model") {
    check_param_keys(name, params, {"bond", "field"});
    const double bond = param(params, "bond", 4.0);
    const double field = param(params, "field", 1.0);
    const MatrixXc up_penalty = 0.5 * (id2 + z);
    terms = fold_fields(n, 0.5 * bond * (identity(4) - kron(z, z)),
                        field * up_penalty);
  } else if (name == "diagonal_commuting" || name == "rotated_classical") {
    check_param_keys(name, params, {"d", "scale"});
    d = integer_param(name, params, "d", 2);
    const double scale = param(params, "scale", 1.0);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      MatrixXc t = MatrixXc::Zero(static_cast<Eigen::Index>(d * d),
                                  static_cast<Eigen::Index>(d * d));
      for (Eigen::Index k = 0; k < t.rows(); ++k) t(k, k) = u(rng);
      terms.push_back(std::move(t));
    }
    if (name == "rotated_classical") {
      std::vector<MatrixXc> site_unitaries;
      for (std::size_t j = 0; j < n; ++j) site_unitaries.push_back(random_unitary(d, rng));
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const MatrixXc w = kron(site_unitaries[j], site_unitaries[j + 1]);
        MatrixXc t = w * terms[j] * w.adjoint();
        terms[j] = 0.5 * (t + t.adjoint());
      }
    }
  } else {
    throw RangeError("unknown model '" + name + "'");
  }
  return make_hamiltonian(std::vector<std::size_t>(n, d), std::move(terms), 1);
}

std::size_t grouping_count(std::size_t d, std::size_t D) {
  if (d < 2 && D > 1) throw RangeError("cannot group sites of dimension 1");
  std::size_t s = 1;
  std::size_t reach = d;
  while (reach < D) {
    reach *= d;
    ++s;
  }
  return s;
}

NnHamiltonian group_boundaries(const NnHamiltonian& h, std::size_t D) {
  if (D == 0) throw RangeError("bond dimension must be positive");
  if (h.s != 1) throw RangeError("group_boundaries expects an ungrouped chain");
  const std::size_t d = h.dims.front();
  for (auto dim : h.dims) {
    if (dim != d) throw RangeError("group_boundaries expects uniform site dimensions");
  }
  const std::size_t s = grouping_count(d, D);
  if (h.n < 2 * s + 1) {
    throw RangeError("chain too short: n = " + std::to_string(h.n) +
                     " cannot host two boundary groups of " + std::to_string(s) +
                     " sites plus one interior site");
  }
  if (s == 1) return h;

  std::size_t d_end = 1;
  for (std::size_t k = 0; k < s; ++k) d_end *= d;

  // Sum of old terms i in [first, first + s) embedded on sites first..first+s.
  auto merged = [&](std::size_t first) {
    MatrixXc sum = MatrixXc::Zero(static_cast<Eigen::Index>(d_end * d),
                                  static_cast<Eigen::Index>(d_end * d));
    for (std::size_t k = 0; k < s; ++k) {
      std::size_t left = 1, right = 1;
      for (std::size_t q = 0; q < k; ++q) left *= d;
      for (std::size_t q = k + 2; q <= s; ++q) right *= d;
      sum += kron(kron(identity(left), h.terms[first + k]), identity(right));
    }
    return sum;
  };

  std::vector<MatrixXc> terms;
  terms.push_back(merged(0));
  for (std::size_t i = s; i + s + 1 < h.n; ++i) terms.push_back(h.terms[i]);
  terms.push_back(merged(h.n - s - 1));

  std::vector<std::size_t> dims(h.n - 2 * (s - 1), d);
  dims.front() = d_end;
  dims.back() = d_end;
  return make_hamiltonian(std::move(dims), std::move(terms), s);
}

double max_term_norm(const NnHamiltonian& h) {
  double j = 0.0;
  for (const auto& t : h.terms) j = std::max(j, operator_norm(t));
  return j;
}

double max_adjacent_commutator(const NnHamiltonian& h) {
  double worst = 0.0;
  for (std::size_t j = 1; j < h.terms.size(); ++j) {
    const MatrixXc a = kron(h.terms[j - 1], identity(h.dims[j + 1]));
    const MatrixXc b = kron(identity(h.dims[j - 1]), h.terms[j]);
    worst = std::max(worst, operator_norm(a * b - b * a));
  }
  return worst;
}

bool is_commuting(const NnHamiltonian& h, double tol) {
  return max_adjacent_commutator(h) <= tol;
}

VectorXc apply_local_operator(std::span<const std::size_t> dims, std::size_t t,
                              const MatrixXc& op, const VectorXc& v) {
  if (t + 1 >= dims.size()) throw RangeError("two-site operator position out of range");
  std::size_t total = 1;
  for (auto dim : dims) total *= dim;
  if (static_cast<std::size_t>(v.size()) != total) {
    throw ShapeError("state dimension " + std::to_string(v.size()) +
                     " does not match chain dimension " + std::to_string(total));
  }
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < t; ++k) left *= dims[k];
  for (std::size_t k = t + 2; k < dims.size(); ++k) right *= dims[k];
  const std::size_t mid = dims[t] * dims[t + 1];
  if (static_cast<std::size_t>(op.rows()) != mid || static_cast<std::size_t>(op.cols()) != mid) {
    throw ShapeError("operator does not act on sites " + std::to_string(t) + ", " +
                     std::to_string(t + 1));
  }
  VectorXc out = VectorXc::Zero(v.size());
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      for (std::size_t a = 0; a < mid; ++a) {
        cplx acc = 0.0;
        for (std::size_t b = 0; b < mid; ++b) {
          acc += op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                 v(static_cast<Eigen::Index>((l * mid + b) * right + r));
        }
        out(static_cast<Eigen::Index>((l * mid + a) * right + r)) = acc;
      }
    }
  }
  return out;
}

VectorXc apply_term(const NnHamiltonian& h, std::size_t t, const VectorXc& v) {
  if (t >= h.terms.size()) throw RangeError("term index out of range");
  return apply_local_operator(h.dims, t, h.terms[t], v);
}

VectorXc apply_hamiltonian(const NnHamiltonian& h, const VectorXc& v) {
  VectorXc out = VectorXc::Zero(v.size());
  for (std::size_t t = 0; t < h.terms.size(); ++t) out += apply_term(h, t, v);
  return out;
}

double dense_energy(const NnHamiltonian& h, const VectorXc& v) {
  const double nrm2 = v.squaredNorm();
  if (nrm2 == 0.0) throw NumericalError("dense_energy: zero vector");
  return v.dot(apply_hamiltonian(h, v)).real() / nrm2;
}

MatrixXc to_dense_hamiltonian(const NnHamiltonian& h) {
  const std::size_t total = h.total_dim();
  if (total > kDenseLimit) {
    throw InfeasibleError("dense Hamiltonian of dimension " + std::to_string(total) +
                          " exceeds the 2^14 size guard");
  }
  MatrixXc out = MatrixXc::Zero(static_cast<Eigen::Index>(total),
                                static_cast<Eigen::Index>(total));
  for (std::size_t t = 0; t < h.terms.size(); ++t) {
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < t; ++k) left *= h.dims[k];
    for (std::size_t k = t + 2; k < h.n; ++k) right *= h.dims[k];
    out += kron(kron(identity(left), h.terms[t]), identity(right));
  }
  return out;
}

}  // namespace mpsdp
