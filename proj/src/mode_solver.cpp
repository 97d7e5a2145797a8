#include "qclring/mode_solver.hpp"

#include "qclring/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace qclring {

namespace {

constexpr double kPi = 3.14159265358979323846;

using SpMat = Eigen::SparseMatrix<double>;

struct Operator {
    SpMat A;
    int i0 = 0;   // first grid column held by the unknowns
    int nxr = 0;  // columns held
};

// Weights of u''(y) at row j for u = eps E, u and (1/eps) u' continuous.
// `e` holds the material permittivity at each cell centre and pos[k] the
// interface position (in cell units, centres at integers) between cells k
// and k+1 where they differ. Returns the stencil length, or 0 when no
// high-order stencil applies. Homogeneous 5-cell window: fourth-order central
// stencil. One interface with three homogeneous cells on each side:
// piecewise cubics joined by the continuity conditions, interpolating the six
// cell values.
int high_order_d2(const std::vector<double>& e, const std::vector<double>& pos, int j, double h, int& lo,
                  double* w) {
    const int ny = int(e.size());
    if (j < 2 || j + 2 >= ny) return 0;
    bool homog = true;
    for (int k = j - 2; k <= j + 2; ++k) homog = homog && e[k] == e[j];
    if (homog) {
        static const double c[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
        lo = j - 2;
        for (int k = 0; k < 5; ++k) w[k] = c[k] / (h * h);
        return 5;
    }
    int f = j - 2;
    while (f < j + 2 && e[f] == e[f + 1]) ++f;
    lo = f - 2;
    const int hi = f + 3;
    if (lo < 0 || hi >= ny) return 0;
    for (int k = lo; k <= f; ++k)
        if (e[k] != e[f]) return 0;
    for (int k = f + 1; k <= hi; ++k)
        if (e[k] != e[f + 1]) return 0;
    // Unknowns: a0..a3 (left cubic in s = y - y_I), b2, b3; b0 = a0, b1 = a1 eq/ep.
    const double ep = e[f], eq = e[f + 1], yi = pos[f];
    Eigen::Matrix<double, 6, 6> M;
    for (int r = 0; r < 6; ++r) {
        double sv = (lo + r - yi) * h;
        if (lo + r <= f) M.row(r) << 1, sv, sv * sv, sv * sv * sv, 0, 0;
        else M.row(r) << 1, sv * eq / ep, 0, 0, sv * sv, sv * sv * sv;
    }
    Eigen::Matrix<double, 1, 6> d2;
    double sj = (j - yi) * h;
    if (j <= f) d2 << 0, 0, 2, 6 * sj, 0, 0;
    else d2 << 0, 0, 0, 0, 2, 6 * sj;
    Eigen::Matrix<double, 1, 6> wt = d2 * M.fullPivLu().inverse();
    for (int k = 0; k < 6; ++k) w[k] = wt(k);
    return 6;
}

// Material column for the high-order stencils. A cell whose permittivity is
// the harmonic mean of two different neighbours is taken as straddled: its
// lower-material fraction f locates the interface, and the cell is assigned
// the material at its centre.
void material_column(const PermittivityGrid& g, int i, std::vector<double>& e, std::vector<double>& pos) {
    const int ny = g.ny;
    e.resize(ny);
    pos.assign(std::max(ny - 1, 0), 0.0);
    for (int j = 0; j < ny; ++j) e[j] = g.at(i, j).real();
    for (int j = 0; j + 1 < ny; ++j) pos[j] = j + 0.5;
    for (int j = 1; j + 1 < ny; ++j) {
        const cplx a = g.at(i, j - 1), c = g.at(i, j), b = g.at(i, j + 1);
        if (c == a || c == b || a == b) continue;
        const double f = ((1.0 / c - 1.0 / b) / (1.0 / a - 1.0 / b)).real();
        if (!(f > 1e-9 && f < 1.0 - 1e-9)) continue;
        if (f >= 0.5) {
            e[j] = a.real();
            pos[j] = j - 0.5 + f;
        } else {
            e[j] = b.real();
            pos[j - 1] = j - 0.5 + f;
        }
    }
}

Operator assemble(const PermittivityGrid& g, double k0, Symmetry sym, int y_order) {
    Operator op;
    op.i0 = sym == Symmetry::None ? 0 : g.nx / 2;
    op.nxr = g.nx - op.i0;
    const int N = op.nxr * g.ny;
    const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(size_t(N) * 7);
    auto e = [&](int i, int j) { return g.at(i, j).real(); };
    std::vector<double> col(g.ny), mat, pos;
    for (int i = op.i0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) col[j] = e(i, j);
        if (y_order == 4) material_column(g, i, mat, pos);
        for (int j = 0; j < g.ny; ++j) {
            const int p = j * op.nxr + (i - op.i0);
            int lo = 0, n = 0;
            double w[6];
            if (y_order == 4) n = high_order_d2(mat, pos, j, g.dy, lo, w);
            const double ep = n > 0 ? mat[j] : col[j];
            double diag = k0 * k0 * ep;
            // x: Neumann at the outer edges, mirror condition at x = 0.
            if (i > op.i0) {
                t.emplace_back(p, p - 1, ix2);
                diag -= ix2;
            } else if (sym == Symmetry::Odd) {
                diag -= 2 * ix2;
            }
            if (i + 1 < g.nx) {
                t.emplace_back(p, p + 1, ix2);
                diag -= ix2;
            }
            // y: d/dy[(1/eps) d(eps E)/dy]; E = 0 on the outer faces.
            if (n > 0) {
                for (int k = 0; k < n; ++k) {
                    int q = lo + k;
                    double c = w[k] * mat[q] / ep;
                    if (q == j) diag += c;
                    else t.emplace_back(p, p + (q - j) * op.nxr, c);
                }
            } else {
                // Second order with face weights 2/(eps_j + eps_q).
                for (int dj : {-1, 1}) {
                    int q = j + dj;
                    if (q < 0 || q >= g.ny) {
                        diag -= 2 * iy2;
                        continue;
                    }
                    double eq = col[q], wf = 2.0 / (ep + eq);
                    t.emplace_back(p, p + dj * op.nxr, wf * eq * iy2);
                    diag -= wf * ep * iy2;
                }
            }
            t.emplace_back(p, p, diag);
        }
    }
    op.A.resize(N, N);
    op.A.setFromTriplets(t.begin(), t.end());
    op.A.makeCompressed();
    return op;
}

// Phase-rotate a complex Ritz vector onto the real axis.
Eigen::VectorXd realify(const Eigen::VectorXcd& x) {
    Eigen::Index k;
    x.cwiseAbs().maxCoeff(&k);
    std::complex<double> ph = std::conj(x(k)) / std::abs(x(k));
    return (x * ph).real();
}

struct RitzPair {
    double lambda;
    Eigen::VectorXd v;
    double residual;
};

std::vector<RitzPair> shift_invert_arnoldi(const SpMat& A, double sigma, const SolverOptions& opt) {
    const Eigen::Index N = A.rows();
    const int want = opt.count;
    if (want > N) throw SolverError("requested more modes than unknowns");
    SpMat B = A;
    for (Eigen::Index k = 0; k < N; ++k) B.coeffRef(k, k) -= sigma;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(B);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed (shift hits an eigenvalue?)");

    std::mt19937_64 rng(opt.seed);
    Eigen::VectorXd start(N);
    for (Eigen::Index k = 0; k < N; ++k) start(k) = double(rng() >> 11) * 0x1.0p-53 - 0.5;

    const int mmax = int(std::min<Eigen::Index>(opt.max_krylov, N));
    std::ostringstream diag;
    double worst = 0.0;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        Eigen::MatrixXd V(N, mmax + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(mmax + 1, mmax);
        V.col(0) = start / start.norm();
        std::vector<RitzPair> best;
        for (int k = 0; k < mmax; ++k) {
            Eigen::VectorXd w = lu.solve(V.col(k));
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXd h = V.leftCols(k + 1).transpose() * w;
                w.noalias() -= V.leftCols(k + 1) * h;
                H.col(k).head(k + 1) += h;
            }
            double hn = w.norm();
            H(k + 1, k) = hn;
            const int m = k + 1;
            bool exhausted = hn < 1e-14 * H.col(k).head(k + 1).norm();
            if (!exhausted) V.col(k + 1) = w / hn;
            if (!(exhausted || m == mmax || (m >= want + 6 && m % 6 == 0))) continue;

            Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m, m));
            Eigen::VectorXcd theta = es.eigenvalues();
            std::vector<int> order(m);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return std::abs(theta(a)) > std::abs(theta(b)); });
            // Skip the conjugate partner of a complex pair.
            std::vector<int> pick;
            for (int idx : order) {
                if (int(pick.size()) == want) break;
                if (theta(idx).imag() < -1e-12 * std::abs(theta(idx))) continue;
                pick.push_back(idx);
            }
            if (int(pick.size()) < want) continue;
            std::vector<RitzPair> pairs;
            worst = 0.0;
            for (int idx : pick) {
                Eigen::VectorXcd y = es.eigenvectors().col(idx);
                Eigen::VectorXd x = realify(V.leftCols(m) * y);
                x /= x.norm();
                double lam = sigma + 1.0 / theta(idx).real();
                double res = (A * x - lam * x).norm();
                worst = std::max(worst, res);
                pairs.push_back({lam, std::move(x), res});
            }
            best = std::move(pairs);
            if (worst < opt.tolerance) return best;
            if (exhausted) break;
        }
        diag << " restart " << restart << ": krylov " << mmax << ", worst residual " << worst << ";";
        start = Eigen::VectorXd::Zero(N);
        for (auto& p : best) start += p.v;
        if (best.empty() || start.norm() == 0)
            for (Eigen::Index k = 0; k < N; ++k) start(k) = double(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
    throw SolverError("eigensolver did not converge (count " + std::to_string(want) +
                      ", sigma " + std::to_string(sigma) + "):" + diag.str());
}

double edge_decades(const ModeSolution& m) {
    double peak = 0, edge = 0;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            double a = std::abs(m.at(i, j));
            peak = std::max(peak, a);
            if (i == 0 || j == 0 || i == m.nx - 1 || j == m.ny - 1) edge = std::max(edge, a);
        }
    if (edge == 0) return 16.0;
    return std::log10(peak / edge);
}

}  // namespace

std::string_view parity_name(Parity p) {
    switch (p) {
        case Parity::Symmetric: return "symmetric";
        case Parity::Antisymmetric: return "antisymmetric";
        default: return "none";
    }
}

bool ModeSolution::same_grid(const ModeSolution& o) const {
    return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && x0 == o.x0 && y0 == o.y0;
}

double default_guess(const PermittivityGrid& g) {
    double edge = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1)
                edge = std::max(edge, std::sqrt(g.at(i, j).real()));
    return 0.5 * (edge + g.max_index());
}

std::vector<ModeSolution> solve_modes_2d(const PermittivityGrid& g, const SolverOptions& opt) {
    if (g.nx < 2 || g.ny < 3 || g.eps.size() != size_t(g.nx) * g.ny) throw GridError("invalid grid");
    if (opt.count < 1) throw ValidationError("mode count must be >= 1");
    if (opt.symmetry != Symmetry::None && !g.symmetric_x())
        throw GridError("half-domain symmetry requested on an asymmetric grid");
    double nmin = 1e300, nmax = 0;
    for (auto& e : g.eps) {
        double n = std::sqrt(std::max(e.real(), 0.0));
        nmin = std::min(nmin, n);
        nmax = std::max(nmax, n);
    }
    const double guess = opt.guess > 0 ? opt.guess : default_guess(g);
    if (!(guess > nmin && guess < nmax))
        throw ValidationError("guess " + std::to_string(guess) + " outside grid index range (" +
                              std::to_string(nmin) + ", " + std::to_string(nmax) + ")");

    const double k0 = 2 * kPi * g.nu * 1e-4;
    if (opt.y_order != 2 && opt.y_order != 4) throw ValidationError("y_order must be 2 or 4");
    Operator op = assemble(g, k0, opt.symmetry, opt.y_order);
    auto pairs = shift_invert_arnoldi(op.A, k0 * k0 * guess * guess, opt);

    std::vector<ModeSolution> out;
    for (auto& p : pairs) {
        ModeSolution m;
        m.nx = g.nx;
        m.ny = g.ny;
        m.dx = g.dx;
        m.dy = g.dy;
        m.x0 = g.x0;
        m.y0 = g.y0;
        m.nu = g.nu;
        m.residual = p.residual;
        m.field.assign(g.size(), 0.0);
        const double mirror = opt.symmetry == Symmetry::Odd ? -1.0 : 1.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = op.i0; i < g.nx; ++i) {
                double v = p.v(j * op.nxr + (i - op.i0));
                m.field[g.index(i, j)] = v;
                if (op.i0 > 0) m.field[g.index(g.nx - 1 - i, j)] = mirror * v;
            }
        double s2 = 0, big = 0;
        for (double v : m.field) {
            s2 += v * v;
            if (std::abs(v) > std::abs(big)) big = v;
        }
        double scale = (big < 0 ? -1.0 : 1.0) / std::sqrt(s2 * g.cell_area());
        for (double& v : m.field) v *= scale;

        double neff = p.lambda > 0 ? std::sqrt(p.lambda) / k0 : 0.0;
        m.n_eff = neff;
        m.loss_cm = neff > 0 ? modal_loss(m, g) : 0.0;
        m.n_eff = cplx(neff, m.loss_cm / (4 * kPi * g.nu));
        m.edge_decades = edge_decades(m);
        m.window_warning = m.edge_decades < 4.0;
        m.parity = g.symmetric_x() ? classify_parity(m, g) : Parity::None;
        m.gamma = g.ar_rect.width() < kInf ? overlap_factor(m, g.ar_rect) : 0.0;
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(),
              [](const ModeSolution& a, const ModeSolution& b) { return a.n_eff.real() > b.n_eff.real(); });
    return out;
}

Parity classify_parity(const ModeSolution& m, const PermittivityGrid& g) {
    if (!g.symmetric_x()) throw GridError("parity classification needs a mirror-symmetric grid");
    double s = 0, n = 0;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            s += m.at(i, j) * m.at(m.nx - 1 - i, j);
            n += m.at(i, j) * m.at(i, j);
        }
    double c = n > 0 ? s / n : 0.0;
    if (c > 0.9) return Parity::Symmetric;
    if (c < -0.9) return Parity::Antisymmetric;
    return Parity::None;
}

Parity classify_parity_y(const ModeSolution& m, const PermittivityGrid& g) {
    auto lobe = [&](const Rect& r) {
        double s = 0;
        for (int j = 0; j < m.ny; ++j)
            for (int i = 0; i < m.nx; ++i) {
                double c = g.coverage(r, i, j);
                if (c > 0) s += c * m.at(i, j);
            }
        return s;
    };
    double a = lobe(g.ar_rect), b = lobe(g.wg_rect);
    double tot = 0;
    for (double v : m.field) tot += std::abs(v);
    // A lobe carrying almost no field has no defined sign.
    if (std::abs(a) < 1e-6 * tot || std::abs(b) < 1e-6 * tot) return Parity::None;
    return (a > 0) == (b > 0) ? Parity::Symmetric : Parity::Antisymmetric;
}

double overlap_factor(const ModeSolution& m, const Rect& r) {
    const double X0 = m.x0, X1 = m.x0 + m.nx * m.dx, Y0 = m.y0, Y1 = m.y0 + m.ny * m.dy;
    if (r.x1 <= X0 || r.x0 >= X1 || r.y1 <= Y0 || r.y0 >= Y1 || !(r.x1 > r.x0) || !(r.y1 > r.y0))
        throw ValidationError("overlap region lies outside the grid window");
    double in = 0, all = 0;
    for (int j = 0; j < m.ny; ++j) {
        double ya = m.y0 + j * m.dy;
        double fy = std::min(ya + m.dy, r.y1) - std::max(ya, r.y0);
        for (int i = 0; i < m.nx; ++i) {
            double e2 = m.at(i, j) * m.at(i, j);
            all += e2;
            if (fy <= 0) continue;
            double xa = m.x0 + i * m.dx;
            double fx = std::min(xa + m.dx, r.x1) - std::max(xa, r.x0);
            if (fx > 0) in += e2 * std::min(1.0, fx / m.dx) * std::min(1.0, fy / m.dy);
        }
    }
    return all > 0 ? std::clamp(in / all, 0.0, 1.0) : 0.0;
}

double modal_loss(const ModeSolution& m, const PermittivityGrid& g) {
    if (m.nx != g.nx || m.ny != g.ny) throw GridError("mode and grid sizes differ");
    double num = 0, den = 0;
    for (size_t k = 0; k < g.size(); ++k) {
        double e2 = m.field[k] * m.field[k];
        num += g.eps[k].imag() * e2;
        den += e2;
    }
    double n = m.n_eff.real();
    if (den == 0 || n <= 0) return 0.0;
    return std::max(0.0, 2 * kPi * g.nu * num / (n * den));
}

double field_overlap(const ModeSolution& a, const ModeSolution& b) {
    if (!a.same_grid(b)) throw GridError("field overlap needs identical grids");
    double s = 0, na = 0, nb = 0;
    for (size_t k = 0; k < a.field.size(); ++k) {
        s += a.field[k] * b.field[k];
        na += a.field[k] * a.field[k];
        nb += b.field[k] * b.field[k];
    }
    return s / std::sqrt(na * nb);
}

std::vector<double> decompose_on_isolated_modes(const ModeSolution& super,
                                                const std::vector<ModeSolution>& isolated) {
    std::vector<double> c;
    for (const auto& m : isolated) c.push_back(field_overlap(super, m));
    return c;
}

int count_intensity_maxima(const ModeSolution& m, const Rect& r, double rel_floor) {
    double peak = 0;
    auto inside = [&](int i, int j) { return r.contains(m.x0 + (i + 0.5) * m.dx, m.y0 + (j + 0.5) * m.dy); };
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            if (inside(i, j)) peak = std::max(peak, std::abs(m.at(i, j)));
    int count = 0;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            if (!inside(i, j)) continue;
            double v = std::abs(m.at(i, j));
            if (v < rel_floor * peak) continue;
            bool top = true;
            for (int dj = -1; dj <= 1 && top; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    if (!di && !dj) continue;
                    int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= m.nx || jj >= m.ny || !inside(ii, jj)) continue;
                    double u = std::abs(m.at(ii, jj));
                    // Ties on plateaus count once: compare lexicographically.
                    if (u > v || (u == v && (jj < j || (jj == j && ii < i)))) {
                        top = false;
                        break;
                    }
                }
            if (top) ++count;
        }
    return count;
}

}  // namespace qclring
