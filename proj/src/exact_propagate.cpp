#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/exact.hpp"

namespace cqed {

namespace {

using Complex = std::complex<double>;

Complex dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(const std::vector<Complex>& a) {
    double acc = 0.0;
    for (const auto& v : a) acc += std::norm(v);
    return std::sqrt(acc);
}

// Lanczos factorization H V = V T + beta_m v_{m+1} e_m^T with one full
// reorthogonalization pass per vector.
struct KrylovSpace {
    std::vector<std::vector<Complex>> v;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] connects v[j] and v[j+1]
    double residual_beta = 0.0;
    bool invariant = false;    // happy breakdown: subspace is H-invariant
};

KrylovSpace build_krylov(const SparseHamiltonian& h, const std::vector<Complex>& psi, int m_max) {
    KrylovSpace space;
    const std::size_t dim = psi.size();
    const int m = std::min<std::size_t>(m_max, dim);
    space.v.reserve(m + 1);

    std::vector<Complex> v0 = psi;
    const double nrm = norm2(v0);
    for (auto& x : v0) x /= nrm;
    space.v.push_back(std::move(v0));

    std::vector<Complex> w(dim);
    for (int j = 0; j < m; ++j) {
        h.apply(space.v[j].data(), w.data());
        if (j > 0) {
            const double b = space.beta[j - 1];
            const auto& prev = space.v[j - 1];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= b * prev[i];
        }
        const double a = dot(space.v[j], w).real();
        space.alpha.push_back(a);
        {
            const auto& cur = space.v[j];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= a * cur[i];
        }
        // Full reorthogonalization.
        for (int p = 0; p <= j; ++p) {
            const Complex c = dot(space.v[p], w);
            const auto& vp = space.v[p];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= c * vp[i];
        }
        const double b = norm2(w);
        if (b < 1e-12 * std::max(1.0, std::abs(a))) {
            space.invariant = true;
            space.residual_beta = 0.0;
            return space;
        }
        if (j + 1 < m) {
            space.beta.push_back(b);
            std::vector<Complex> next(dim);
            for (std::size_t i = 0; i < dim; ++i) next[i] = w[i] / b;
            space.v.push_back(std::move(next));
        } else {
            space.residual_beta = b;
        }
    }
    return space;
}

// exp(-i T dt) e_1 for the tridiagonal T of the Krylov space.
Eigen::VectorXcd small_exponential(const KrylovSpace& space, double dt) {
    const int m = static_cast<int>(space.alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = space.alpha[i];
        if (i + 1 < m) {
            t(i, i + 1) = space.beta[i];
            t(i + 1, i) = space.beta[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const Eigen::MatrixXd& s = eig.eigenvectors();
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i) phases(i) = std::exp(Complex(0.0, -lam(i) * dt));
    const Eigen::VectorXd first = s.row(0).transpose();
    return s * (phases.array() * first.array().cast<Complex>()).matrix();
}

} // namespace

void propagate_to(CIState& state, const SparseHamiltonian& hamiltonian, double t_target,
                  const PropagationOptions& options) {
    if (state.amplitudes.size() != hamiltonian.dim)
        throw domain_error("propagate: state dimension does not match the Hamiltonian");
    if (t_target < state.time - 1e-12)
        throw domain_error("propagate: target time is in the past");
    if (!(options.tolerance > 0.0) || options.krylov_dim < 2)
        throw config_error("propagate: bad tolerance or Krylov dimension");

    double dt_try = options.max_step;
    while (state.time < t_target - 1e-12) {
        dt_try = std::min(dt_try, t_target - state.time);
        const double input_norm = norm2(state.amplitudes);
        KrylovSpace space = build_krylov(hamiltonian, state.amplitudes, options.krylov_dim);

        double dt = space.invariant ? (t_target - state.time) : dt_try;
        Eigen::VectorXcd u;
        if (!space.invariant) {
            for (int halvings = 0;; ++halvings) {
                u = small_exponential(space, dt);
                const double err =
                    space.residual_beta * std::abs(u(u.size() - 1)) * dt;
                if (err <= options.tolerance) {
                    if (err < 0.05 * options.tolerance) dt_try = dt * 1.5;
                    else dt_try = dt;
                    break;
                }
                if (halvings >= 60)
                    throw std::runtime_error(
                        "propagate: Krylov step failed to meet tolerance " +
                        std::to_string(options.tolerance) + " at dt = " + std::to_string(dt));
                dt *= 0.5;
            }
        } else {
            u = small_exponential(space, dt);
        }

        const std::size_t dim = state.amplitudes.size();
        std::vector<Complex> next(dim, Complex{0.0, 0.0});
        for (std::size_t j = 0; j < space.v.size() && j < static_cast<std::size_t>(u.size());
             ++j) {
            const Complex c = u(static_cast<int>(j)) * input_norm;
            const auto& vj = space.v[j];
            for (std::size_t i = 0; i < dim; ++i) next[i] += c * vj[i];
        }
        state.amplitudes.swap(next);
        state.time += dt;

        const double drift = std::abs(norm2(state.amplitudes) - input_norm);
        if (drift > 1e-6)
            throw std::runtime_error("propagate: norm drift " + std::to_string(drift) +
                                     " in one step; Krylov basis lost orthogonality");
    }
    state.time = t_target;
}

} // namespace cqed
