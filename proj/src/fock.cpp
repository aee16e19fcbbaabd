#include "chiralmet/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace chiralmet {

namespace {

constexpr int kBuildPad = 20;

int flat(int n1, int n2, int d) { return n1 * d + n2; }

std::vector<double> log_factorials(int n) {
    std::vector<double> lg(n + 1);
    for (int j = 0; j <= n; ++j) lg[j] = std::lgamma(j + 1.0);
    return lg;
}

complexd ipow(complexd base, int e) {
    complexd out(1.0, 0.0);
    for (int j = 0; j < e; ++j) out *= base;
    return out;
}

Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& g) {
    const Eigen::MatrixXcd h = complexd(0.0, -1.0) * g;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase(es.eigenvalues().size());
    for (int j = 0; j < phase.size(); ++j)
        phase(j) = std::exp(complexd(0.0, es.eigenvalues()(j)));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::VectorXcd displaced_squeezed_mode(complexd alpha, double s,
                                         double theta, int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = 1.0;
    if (s != 0.0) {
        const Eigen::MatrixXcd a2 = a * a;
        const Eigen::MatrixXcd gen =
            0.5 * s *
            (std::exp(complexd(0.0, -theta)) * a2 -
             std::exp(complexd(0.0, theta)) * a2.adjoint());
        psi = expm_antihermitian(gen) * psi;
    }
    if (alpha != complexd(0.0, 0.0)) {
        const Eigen::MatrixXcd gen =
            alpha * a.adjoint().eval() - std::conj(alpha) * a;
        psi = expm_antihermitian(gen) * psi;
    }
    return psi;
}

// Block of the passive lift on total photon number n; column k expands
// (V11 x + V21 y)^k (V12 x + V22 y)^{n-k}, row m picks x^m y^{n-m}.
Eigen::MatrixXcd passive_block(const Eigen::Matrix2cd& v, int n,
                               const std::vector<double>& lg) {
    Eigen::MatrixXcd u(n + 1, n + 1);
    std::vector<complexd> p1, p2, conv;
    for (int k = 0; k <= n; ++k) {
        p1.assign(k + 1, complexd(0.0, 0.0));
        for (int i = 0; i <= k; ++i)
            p1[i] = std::exp(lg[k] - lg[i] - lg[k - i]) *
                    ipow(v(0, 0), i) * ipow(v(1, 0), k - i);
        const int q = n - k;
        p2.assign(q + 1, complexd(0.0, 0.0));
        for (int j = 0; j <= q; ++j)
            p2[j] = std::exp(lg[q] - lg[j] - lg[q - j]) *
                    ipow(v(0, 1), j) * ipow(v(1, 1), q - j);
        conv.assign(n + 1, complexd(0.0, 0.0));
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= q; ++j) conv[i + j] += p1[i] * p2[j];
        for (int m = 0; m <= n; ++m)
            u(m, k) = conv[m] * std::exp(0.5 * (lg[m] + lg[n - m] - lg[k] -
                                                lg[n - k]));
    }
    return u;
}

double loss_coef(int n, int k, double t, const std::vector<double>& lg) {
    if (k == 0) return std::pow(t, 0.5 * n);
    if (t >= 1.0) return 0.0;
    if (t <= 0.0) return k == n ? 1.0 : 0.0;
    const double l = lg[n] - lg[k] - lg[n - k] + (n - k) * std::log(t) +
                     k * std::log1p(-t);
    return std::exp(0.5 * l);
}

void require_transmission(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("transmission must lie in [0, 1]");
}

Eigen::Matrix2cd birefringence_map(const BirefringencePhases& phases) {
    const double half = 0.5 * phases.delta_phi();
    Eigen::Matrix2cd b;
    b << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
    return std::exp(complexd(0.0, phases.common_phase())) * b;
}

// Loss on mode 1 of a dense two-mode density matrix.
Eigen::MatrixXcd dense_loss_mode1(const Eigen::MatrixXcd& rho, double t,
                                  int cutoff) {
    const int d = cutoff + 1;
    const auto lg = log_factorials(cutoff);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (int k = 0; k <= cutoff; ++k) {
        for (int m = 0; m + k <= cutoff; ++m) {
            const double cm = loss_coef(m + k, k, t, lg);
            if (cm == 0.0) continue;
            for (int mp = 0; mp + k <= cutoff; ++mp) {
                const double c = cm * loss_coef(mp + k, k, t, lg);
                if (c == 0.0) continue;
                out.block(m * d, mp * d, d, d) +=
                    c * rho.block((m + k) * d, (mp + k) * d, d, d);
            }
        }
    }
    return out;
}

Eigen::MatrixXcd swap_modes(const Eigen::MatrixXcd& rho, int cutoff) {
    const int d = cutoff + 1;
    Eigen::MatrixXcd out(rho.rows(), rho.cols());
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            for (int m1 = 0; m1 < d; ++m1)
                for (int m2 = 0; m2 < d; ++m2)
                    out(flat(n2, n1, d), flat(m2, m1, d)) =
                        rho(flat(n1, n2, d), flat(m1, m2, d));
    return out;
}

double sld_assemble(const Eigen::VectorXd& p, const Eigen::MatrixXcd& m,
                    const Eigen::VectorXd& kdiag, double floor) {
    const int r = int(p.size());
    std::vector<char> keep(r);
    for (int j = 0; j < r; ++j) keep[j] = p(j) > floor;
    double f = 0.0;
    for (int j = 0; j < r; ++j) {
        if (!keep[j]) continue;
        f += std::norm(m(j, j)) / p(j);
        double kernel = kdiag(j);
        for (int k = 0; k < r; ++k)
            if (!keep[k]) kernel += std::norm(m(j, k));
        f += 4.0 * kernel / p(j);
        for (int k = j + 1; k < r; ++k)
            if (keep[k]) f += 4.0 * std::norm(m(j, k)) / (p(j) + p(k));
    }
    return f;
}

SldResult sld_from_parts(const Eigen::VectorXd& p, const Eigen::MatrixXcd& m,
                         const Eigen::VectorXd& kdiag, double floor,
                         double dc) {
    SldResult out;
    out.floor = floor;
    out.rank = int(p.size());
    out.step = dc;
    out.qfi = sld_assemble(p, m, kdiag, floor);
    out.qfi_coarse_floor = sld_assemble(p, m, kdiag, 10.0 * floor);
    return out;
}

std::array<double, 5> richardson_weights(double dc) {
    return {1.0 / (12.0 * dc), -8.0 / (12.0 * dc), 0.0, 8.0 / (12.0 * dc),
            -1.0 / (12.0 * dc)};
}

}  // namespace

int fock_auto_cutoff(const ProbeSpec& probe) {
    const double load = std::norm(probe.alpha) + std::pow(std::sinh(probe.s), 2);
    return int(std::ceil(8.0 * load + 20.0));
}

Eigen::VectorXcd probe_vector_fock(const ProbeSpec& probe, int cutoff,
                                   double leak_tol) {
    if (cutoff < 1) throw std::invalid_argument("cutoff must be positive");
    if (probe.s < 0.0)
        throw std::invalid_argument("squeezing factor must be nonnegative");
    const int d = cutoff + 1;
    const int big = d + kBuildPad;
    const complexd a2 = probe.family == ProbeFamily::polarization_squeezed
                            ? complexd(0.0, 0.0)
                            : probe.alpha;
    const Eigen::VectorXcd m1 =
        displaced_squeezed_mode(probe.alpha, probe.s, probe.theta, big);
    const Eigen::VectorXcd m2 =
        a2 == probe.alpha ? m1
                          : displaced_squeezed_mode(a2, probe.s, probe.theta, big);
    Eigen::VectorXcd psi(d * d);
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2) psi(flat(n1, n2, d)) = m1(n1) * m2(n2);
    const double leak = 1.0 - psi.squaredNorm();
    if (leak > leak_tol) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "probe leaks past the cutoff: leak %.3e > %.3e", leak,
                      leak_tol);
        throw std::runtime_error(msg);
    }
    return psi;
}

FockDensity build_probe_fock(const ProbeSpec& probe, int cutoff,
                             double leak_tol) {
    const Eigen::VectorXcd psi = probe_vector_fock(probe, cutoff, leak_tol);
    FockDensity out;
    out.cutoff = cutoff;
    out.rho = psi * psi.adjoint();
    out.trace_deficit = 1.0 - psi.squaredNorm();
    return out;
}

// Blocks with total photon number above the cutoff sit only partly inside the
// truncated box; they pass through unrotated, which keeps the map exactly
// unitary and costs accuracy only in the corner mass already counted against
// leak_tol.
Eigen::VectorXcd apply_passive_fock(const Eigen::VectorXcd& psi,
                                    const Eigen::Matrix2cd& v, int cutoff) {
    const int d = cutoff + 1;
    if (psi.size() != d * d)
        throw std::invalid_argument("state size does not match cutoff");
    const auto lg = log_factorials(cutoff);
    Eigen::VectorXcd out = psi;
    Eigen::VectorXcd x, y;
    for (int n = 0; n <= cutoff; ++n) {
        const Eigen::MatrixXcd u = passive_block(v, n, lg);
        x.resize(n + 1);
        for (int k = 0; k <= n; ++k) x(k) = psi(flat(k, n - k, d));
        y = u * x;
        for (int k = 0; k <= n; ++k) out(flat(k, n - k, d)) = y(k);
    }
    return out;
}

FockDensity apply_birefringence_fock(const FockDensity& rho,
                                     const BirefringencePhases& phases) {
    const int d = rho.cutoff + 1;
    if (rho.rho.rows() != d * d)
        throw std::invalid_argument("density size does not match cutoff");
    const Eigen::Matrix2cd v = birefringence_map(phases);
    const auto lg = log_factorials(rho.cutoff);
    std::vector<Eigen::MatrixXcd> blocks(rho.cutoff + 1);
    for (int n = 0; n <= rho.cutoff; ++n) blocks[n] = passive_block(v, n, lg);

    FockDensity out;
    out.cutoff = rho.cutoff;
    out.trace_deficit = rho.trace_deficit;
    out.rho = rho.rho;
    Eigen::MatrixXcd strip;
    for (int n = 0; n <= rho.cutoff; ++n) {
        strip.resize(n + 1, d * d);
        for (int k = 0; k <= n; ++k) strip.row(k) = out.rho.row(flat(k, n - k, d));
        strip = blocks[n] * strip;
        for (int k = 0; k <= n; ++k) out.rho.row(flat(k, n - k, d)) = strip.row(k);
    }
    for (int np = 0; np <= rho.cutoff; ++np) {
        strip.resize(np + 1, d * d);
        for (int kp = 0; kp <= np; ++kp)
            strip.row(kp) = out.rho.col(flat(kp, np - kp, d)).transpose();
        strip = blocks[np].conjugate() * strip;
        for (int kp = 0; kp <= np; ++kp)
            out.rho.col(flat(kp, np - kp, d)) = strip.row(kp).transpose();
    }
    return out;
}

FockDensity apply_loss_fock(const FockDensity& rho, double t1, double t2) {
    require_transmission(t1);
    require_transmission(t2);
    const int d = rho.cutoff + 1;
    if (rho.rho.rows() != d * d)
        throw std::invalid_argument("density size does not match cutoff");
    FockDensity out;
    out.cutoff = rho.cutoff;
    out.trace_deficit = rho.trace_deficit;
    out.rho = dense_loss_mode1(rho.rho, t1, rho.cutoff);
    if (t2 != 1.0) {
        out.rho = swap_modes(out.rho, rho.cutoff);
        out.rho = dense_loss_mode1(out.rho, t2, rho.cutoff);
        out.rho = swap_modes(out.rho, rho.cutoff);
    }
    return out;
}

FockDensity apply_dichroism_fock(const FockDensity& rho,
                                 const DichroismTransmissions& trans) {
    return apply_loss_fock(rho, trans.T_L, trans.T_R);
}

bool is_physical_fock(const FockDensity& rho, double tol) {
    const double scale = std::max(1.0, rho.rho.cwiseAbs().maxCoeff());
    if ((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        return false;
    const double tr = rho.rho.trace().real();
    if (tr > 1.0 + tol) return false;
    if (tr < 1.0 - rho.trace_deficit - tol) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho,
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -std::max(tol, 1e-9);
}

GaussianState moments_from_fock(const FockDensity& rho, ModeLabels labels) {
    const int d = rho.cutoff + 1;
    const Eigen::MatrixXcd& r = rho.rho;
    const double tr = r.trace().real();
    complexd e1(0, 0), e2(0, 0), n11(0, 0), n22(0, 0), n12(0, 0);
    complexd s11(0, 0), s22(0, 0), s12(0, 0);
    for (int n1 = 0; n1 < d; ++n1) {
        for (int n2 = 0; n2 < d; ++n2) {
            const int row = flat(n1, n2, d);
            n11 += double(n1) * r(row, row);
            n22 += double(n2) * r(row, row);
            if (n1 >= 1)
                e1 += std::sqrt(double(n1)) * r(row, flat(n1 - 1, n2, d));
            if (n2 >= 1)
                e2 += std::sqrt(double(n2)) * r(row, flat(n1, n2 - 1, d));
            if (n1 >= 2)
                s11 += std::sqrt(double(n1) * (n1 - 1.0)) *
                       r(row, flat(n1 - 2, n2, d));
            if (n2 >= 2)
                s22 += std::sqrt(double(n2) * (n2 - 1.0)) *
                       r(row, flat(n1, n2 - 2, d));
            if (n1 >= 1 && n2 >= 1)
                s12 += std::sqrt(double(n1) * double(n2)) *
                       r(row, flat(n1 - 1, n2 - 1, d));
            if (n2 >= 1 && n1 + 1 < d)
                n12 += std::sqrt((n1 + 1.0) * double(n2)) *
                       r(row, flat(n1 + 1, n2 - 1, d));
        }
    }
    e1 /= tr; e2 /= tr; n11 /= tr; n22 /= tr; n12 /= tr;
    s11 /= tr; s22 /= tr; s12 /= tr;

    GaussianState out;
    out.labels = labels;
    out.d << e1, e2, std::conj(e1), std::conj(e2);
    Mat4& g = out.sigma;
    g(0, 0) = 2.0 * (n11 - std::norm(e1)) + 1.0;
    g(1, 1) = 2.0 * (n22 - std::norm(e2)) + 1.0;
    g(0, 1) = 2.0 * (std::conj(n12) - std::conj(e2) * e1);
    g(1, 0) = std::conj(g(0, 1));
    g(0, 2) = 2.0 * (s11 - e1 * e1);
    g(1, 3) = 2.0 * (s22 - e2 * e2);
    g(0, 3) = 2.0 * (s12 - e1 * e2);
    g(1, 2) = g(0, 3);
    g.block<2, 2>(2, 2) = g.block<2, 2>(0, 0).conjugate();
    g.block<2, 2>(2, 0) = g.block<2, 2>(0, 2).adjoint();
    return out;
}

double OutcomeDistribution::total() const { return probs.sum(); }

double OutcomeDistribution::mean() const {
    return values.dot(probs) / probs.sum();
}

double OutcomeDistribution::variance() const {
    const double m = mean();
    return (values.array() - m).square().matrix().dot(probs) / probs.sum();
}

LowRankState lossy_pure_fock(const Eigen::VectorXcd& psi, double t1, double t2,
                             int cutoff, double tail_tol) {
    require_transmission(t1);
    require_transmission(t2);
    const int d = cutoff + 1;
    if (psi.size() != d * d)
        throw std::invalid_argument("state size does not match cutoff");
    const auto lg = log_factorials(cutoff);
    Eigen::MatrixXd c1(d, d), c2(d, d);
    for (int n = 0; n < d; ++n)
        for (int k = 0; k <= n; ++k) {
            c1(n, k) = loss_coef(n, k, t1, lg);
            c2(n, k) = loss_coef(n, k, t2, lg);
        }

    const double total = psi.squaredNorm();
    double acc = 0.0;
    std::vector<Eigen::VectorXcd> cols;
    Eigen::VectorXcd b(d * d);
    for (int shell = 0; shell <= 2 * cutoff; ++shell) {
        for (int k1 = std::max(0, shell - cutoff);
             k1 <= std::min(cutoff, shell); ++k1) {
            const int k2 = shell - k1;
            b.setZero();
            for (int n1 = k1; n1 < d; ++n1) {
                if (c1(n1, k1) == 0.0) continue;
                for (int n2 = k2; n2 < d; ++n2) {
                    const double c = c1(n1, k1) * c2(n2, k2);
                    if (c == 0.0) continue;
                    b(flat(n1 - k1, n2 - k2, d)) = c * psi(flat(n1, n2, d));
                }
            }
            const double nb = b.squaredNorm();
            if (nb > 1e-18 * total) {
                cols.push_back(b);
                acc += nb;
            }
        }
        if (total - acc <= tail_tol * total) break;
    }
    if (cols.empty()) throw std::runtime_error("state has no retained mass");

    LowRankState out;
    out.cutoff = cutoff;
    out.columns.resize(d * d, int(cols.size()));
    for (int j = 0; j < int(cols.size()); ++j) out.columns.col(j) = cols[j];
    out.trace_deficit = 1.0 - acc;
    return out;
}

OutcomeDistribution balanced_distribution_fock(const FockDensity& rho,
                                               double xi) {
    const int d = rho.cutoff + 1;
    Eigen::Matrix2cd w;
    w << std::cos(xi), std::sin(xi), std::sin(xi), -std::cos(xi);
    const auto lg = log_factorials(rho.cutoff);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(d * d);
    Eigen::MatrixXcd sub;
    for (int n = 0; n <= rho.cutoff; ++n) {
        const Eigen::MatrixXcd u = passive_block(w, n, lg);
        sub.resize(n + 1, n + 1);
        for (int k = 0; k <= n; ++k)
            for (int kp = 0; kp <= n; ++kp)
                sub(k, kp) =
                    rho.rho(flat(k, n - k, d), flat(kp, n - kp, d));
        sub = u * sub * u.adjoint();
        for (int k = 0; k <= n; ++k)
            diag(flat(k, n - k, d)) += std::max(0.0, sub(k, k).real());
    }
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            if (n1 + n2 > rho.cutoff)
                diag(flat(n1, n2, d)) +=
                    std::max(0.0, rho.rho(flat(n1, n2, d), flat(n1, n2, d)).real());
    OutcomeDistribution out;
    out.values.resize(2 * rho.cutoff + 1);
    out.probs = Eigen::VectorXd::Zero(2 * rho.cutoff + 1);
    for (int v = -rho.cutoff; v <= rho.cutoff; ++v)
        out.values(v + rho.cutoff) = v;
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            out.probs(n1 - n2 + rho.cutoff) += diag(flat(n1, n2, d));
    return out;
}

OutcomeDistribution balanced_distribution_fock(const LowRankState& st,
                                               double xi) {
    const int d = st.cutoff + 1;
    Eigen::Matrix2cd w;
    w << std::cos(xi), std::sin(xi), std::sin(xi), -std::cos(xi);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(d * d);
    for (int j = 0; j < st.columns.cols(); ++j)
        diag += apply_passive_fock(st.columns.col(j), w, st.cutoff)
                    .cwiseAbs2();
    OutcomeDistribution out;
    out.values.resize(2 * st.cutoff + 1);
    out.probs = Eigen::VectorXd::Zero(2 * st.cutoff + 1);
    for (int v = -st.cutoff; v <= st.cutoff; ++v)
        out.values(v + st.cutoff) = v;
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            out.probs(n1 - n2 + st.cutoff) += diag(flat(n1, n2, d));
    return out;
}

Eigen::MatrixXd joint_number_distribution_fock(const FockDensity& rho) {
    const int d = rho.cutoff + 1;
    Eigen::MatrixXd p(d, d);
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            p(n1, n2) = std::max(0.0, rho.rho(flat(n1, n2, d), flat(n1, n2, d)).real());
    return p;
}

Eigen::MatrixXd joint_number_distribution_fock(const LowRankState& st) {
    const int d = st.cutoff + 1;
    const Eigen::VectorXd diag = st.columns.cwiseAbs2().rowwise().sum();
    Eigen::MatrixXd p(d, d);
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2) p(n1, n2) = diag(flat(n1, n2, d));
    return p;
}

SldResult qfi_sld(const std::function<FockDensity(double)>& family, double c,
                  double dc, double floor_scale) {
    if (!(dc > 0.0)) throw std::invalid_argument("step must be positive");
    const auto wts = richardson_weights(dc);
    const std::array<double, 5> offs{-2.0, -1.0, 0.0, 1.0, 2.0};
    FockDensity center = family(c);
    const int dim = int(center.rho.rows());
    Eigen::MatrixXcd rho_dot = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < 5; ++i) {
        if (wts[i] == 0.0) continue;
        const FockDensity st = family(c + offs[i] * dc);
        if (st.rho.rows() != dim)
            throw std::invalid_argument("family changed dimension");
        rho_dot += wts[i] * st.rho;
    }
    rho_dot = 0.5 * (rho_dot + rho_dot.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (center.rho + center.rho.adjoint()));
    const double pmax = es.eigenvalues().maxCoeff();
    const double floor = floor_scale * pmax;
    std::vector<int> sel;
    for (int j = dim - 1; j >= 0; --j)
        if (es.eigenvalues()(j) > floor) sel.push_back(j);
    if (sel.empty()) throw std::runtime_error("state has no spectral mass");
    const int r = int(sel.size());
    Eigen::MatrixXcd e(dim, r);
    Eigen::VectorXd p(r);
    for (int j = 0; j < r; ++j) {
        p(j) = es.eigenvalues()(sel[j]);
        e.col(j) = es.eigenvectors().col(sel[j]);
    }
    const Eigen::MatrixXcd y = rho_dot * e;
    const Eigen::MatrixXcd m = e.adjoint() * y;
    const Eigen::VectorXd kdiag =
        ((y.adjoint() * y - m.adjoint() * m).diagonal().real())
            .cwiseMax(0.0);
    return sld_from_parts(p, 0.5 * (m + m.adjoint()), kdiag, floor, dc);
}

SldResult qfi_sld_lowrank(const std::function<LowRankState(double)>& family,
                          double c, double dc, double floor_scale) {
    if (!(dc > 0.0)) throw std::invalid_argument("step must be positive");
    const auto wts = richardson_weights(dc);
    const std::array<double, 5> offs{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::array<LowRankState, 5> st;
    for (int i = 0; i < 5; ++i) st[i] = family(c + offs[i] * dc);
    const Eigen::MatrixXcd& b0 = st[2].columns;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b0.adjoint() * b0);
    const double pmax = es.eigenvalues().maxCoeff();
    const double floor = floor_scale * pmax;
    std::vector<int> sel;
    for (int j = int(es.eigenvalues().size()) - 1; j >= 0; --j)
        if (es.eigenvalues()(j) > floor) sel.push_back(j);
    if (sel.empty()) throw std::runtime_error("state has no spectral mass");
    const int r = int(sel.size());
    Eigen::MatrixXcd w(b0.cols(), r);
    Eigen::VectorXd p(r);
    for (int j = 0; j < r; ++j) {
        p(j) = es.eigenvalues()(sel[j]);
        w.col(j) = es.eigenvectors().col(sel[j]) / std::sqrt(p(j));
    }
    const Eigen::MatrixXcd e = b0 * w;
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(e.rows(), r);
    for (int i = 0; i < 5; ++i) {
        if (wts[i] == 0.0) continue;
        y += wts[i] * (st[i].columns * (st[i].columns.adjoint() * e));
    }
    const Eigen::MatrixXcd m = e.adjoint() * y;
    const Eigen::VectorXd kdiag =
        ((y.adjoint() * y - m.adjoint() * m).diagonal().real())
            .cwiseMax(0.0);
    return sld_from_parts(p, 0.5 * (m + m.adjoint()), kdiag, floor, dc);
}

LowRankState birefringence_output_fock(const ProbeSpec& probe,
                                       const ChiralSample& sample,
                                       double common_phase, int cutoff) {
    if (probe.family != ProbeFamily::polarization_squeezed)
        throw std::invalid_argument(
            "birefringence acts on the polarization-squeezed probe");
    if (!(sample.efficiency >= 0.0 && sample.efficiency <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    if (cutoff <= 0) cutoff = fock_auto_cutoff(probe);
    const Eigen::VectorXcd psi = probe_vector_fock(probe, cutoff);
    const auto phases = phases_from_sample(sample, common_phase);
    const Eigen::VectorXcd rotated =
        apply_passive_fock(psi, birefringence_map(phases), cutoff);
    return lossy_pure_fock(rotated, sample.efficiency, sample.efficiency,
                           cutoff);
}

LowRankState dichroism_output_fock(const ProbeSpec& probe,
                                   const ChiralSample& sample, int cutoff) {
    if (probe.family != ProbeFamily::twin_amplitude_squeezed)
        throw std::invalid_argument(
            "dichroism acts on the twin amplitude-squeezed probe");
    if (!(sample.efficiency >= 0.0 && sample.efficiency <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    if (cutoff <= 0) cutoff = fock_auto_cutoff(probe);
    const Eigen::VectorXcd psi = probe_vector_fock(probe, cutoff);
    const auto trans = transmissions_from_sample(sample);
    return lossy_pure_fock(psi, sample.efficiency * trans.T_L,
                           sample.efficiency * trans.T_R, cutoff);
}

SldResult oracle_qfi_birefringence(const ProbeSpec& probe,
                                   const ChiralSample& sample,
                                   double common_phase, int cutoff) {
    if (probe.family != ProbeFamily::polarization_squeezed)
        throw std::invalid_argument(
            "birefringence acts on the polarization-squeezed probe");
    if (!(sample.efficiency >= 0.0 && sample.efficiency <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    if (cutoff <= 0) cutoff = fock_auto_cutoff(probe);
    const Eigen::VectorXcd psi = probe_vector_fock(probe, cutoff);
    const double c0 = sample.concentration;
    const double dc = 1e-4 * std::max(std::abs(c0), 1.0);
    auto family = [&](double c) {
        ChiralSample varied = sample;
        varied.concentration = c;
        const auto phases = phases_from_sample(varied, common_phase);
        const Eigen::VectorXcd rotated =
            apply_passive_fock(psi, birefringence_map(phases), cutoff);
        return lossy_pure_fock(rotated, sample.efficiency, sample.efficiency,
                               cutoff);
    };
    return qfi_sld_lowrank(family, c0, dc);
}

SldResult oracle_qfi_dichroism(const ProbeSpec& probe,
                               const ChiralSample& sample, int cutoff) {
    if (probe.family != ProbeFamily::twin_amplitude_squeezed)
        throw std::invalid_argument(
            "dichroism acts on the twin amplitude-squeezed probe");
    if (!(sample.efficiency >= 0.0 && sample.efficiency <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    if (cutoff <= 0) cutoff = fock_auto_cutoff(probe);
    const Eigen::VectorXcd psi = probe_vector_fock(probe, cutoff);
    const double c0 = sample.concentration;
    const double dc = 1e-4 * std::max(std::abs(c0), 1.0);
    auto family = [&](double c) {
        ChiralSample varied = sample;
        varied.concentration = c;
        const auto trans = transmissions_from_sample(varied);
        return lossy_pure_fock(psi, sample.efficiency * trans.T_L,
                               sample.efficiency * trans.T_R, cutoff);
    };
    return qfi_sld_lowrank(family, c0, dc);
}

}  // namespace chiralmet
