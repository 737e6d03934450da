#include "sampcert/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sampcert {

namespace {

std::string num_repr(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Inaccurate: return "inaccurate";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

void ConicProblem::validate() const {
    const int m = num_rows();
    auto check_coord = [&](int block, int r, int c, const char* what) {
        if (block < 0 || block >= static_cast<int>(blocks.size()))
            throw std::invalid_argument(std::string(what) + ": block index out of range");
        const Block& b = blocks[static_cast<std::size_t>(block)];
        if (b.size < 1) throw std::invalid_argument("block size must be positive");
        if (r < 0 || c < 0 || r >= b.size || c >= b.size)
            throw std::invalid_argument(std::string(what) + ": entry index out of range");
        if (b.kind == BlockKind::Psd && r > c)
            throw std::invalid_argument(std::string(what) +
                                        ": PSD entries must address the upper triangle");
        if (b.kind == BlockKind::Free && r != c)
            throw std::invalid_argument(std::string(what) +
                                        ": free entries must use r == c == scalar index");
    };
    for (const auto& e : A) {
        if (e.row < 0 || e.row >= m) throw std::invalid_argument("A: row index out of range");
        if (!std::isfinite(e.value)) throw std::invalid_argument("A: non-finite value");
        check_coord(e.block, e.r, e.c, "A");
    }
    for (const auto& e : objective) {
        if (!std::isfinite(e.value)) throw std::invalid_argument("objective: non-finite value");
        check_coord(e.block, e.r, e.c, "objective");
    }
    for (double v : rhs)
        if (!std::isfinite(v)) throw std::invalid_argument("rhs: non-finite value");
    if (!row_labels.empty() && row_labels.size() != rhs.size())
        throw std::invalid_argument("row_labels must be empty or one per row");
}

std::string ConicProblem::dump() const {
    std::string out;
    out += "blocks " + std::to_string(blocks.size()) + "\n";
    for (std::size_t i = 0; i < blocks.size(); ++i)
        out += "block " + std::to_string(i) + " " +
               (blocks[i].kind == BlockKind::Free ? "free " : "psd ") +
               std::to_string(blocks[i].size) + "\n";
    out += "rows " + std::to_string(rhs.size()) + "\n";
    for (const auto& e : A)
        out += "A " + std::to_string(e.row) + " " + std::to_string(e.block) + " " +
               std::to_string(e.r) + " " + std::to_string(e.c) + " " + num_repr(e.value) + "\n";
    for (std::size_t i = 0; i < rhs.size(); ++i)
        out += "rhs " + std::to_string(i) + " " + num_repr(rhs[i]) + "\n";
    for (const auto& e : objective)
        out += "obj " + std::to_string(e.block) + " " + std::to_string(e.r) + " " +
               std::to_string(e.c) + " " + num_repr(e.value) + "\n";
    if (!row_labels.empty())
        for (std::size_t i = 0; i < row_labels.size(); ++i)
            out += "label " + std::to_string(i) + " " + row_labels[i] + "\n";
    return out;
}

std::pair<bool, double> check_psd(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) throw std::invalid_argument("check_psd: matrix not square");
    if (m.rows() == 0) return {true, 0.0};
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw std::invalid_argument("check_psd: matrix asymmetric beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    return {min_eig >= -tol, min_eig};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct PsdEntry {
    int r, c;
    double v;
};

// Triplets of one PSD block grouped by constraint row, rows ascending.
struct RowGroup {
    int row;
    int begin, end;  // range into PsdBlockData::entries
};

struct PsdBlockData {
    int orig_block;
    int n;
    std::vector<PsdEntry> entries;
    std::vector<RowGroup> groups;
    MatrixXd C;
};

// <A_i, T> for symmetric A_i (stored upper-tri) against a general matrix T.
template <typename Mat>
typename Mat::Scalar sym_inner(const PsdBlockData& blk, const RowGroup& g, const Mat& T) {
    typename Mat::Scalar acc = 0;
    for (int t = g.begin; t < g.end; ++t) {
        const PsdEntry& e = blk.entries[static_cast<std::size_t>(t)];
        acc += e.r == e.c ? e.v * T(e.r, e.c) : e.v * (T(e.r, e.c) + T(e.c, e.r));
    }
    return acc;
}

// Working form of the problem after presolve and scaling.
struct WorkData {
    int m = 0;       // rows after compaction
    int nfree = 0;   // free columns after pinning
    std::vector<PsdBlockData> psd;
    MatrixXd B;      // m x nfree
    VectorXd d;      // free objective
    VectorXd rhs;

    std::vector<int> row_to_orig;                 // compacted row -> original row
    std::vector<std::pair<int, int>> free_cols;   // (orig block, index) per column

    // Scaling bookkeeping (see unscale_* below).
    std::vector<double> row_scale;   // per compacted row
    std::vector<double> blk_scale;   // per PSD block (parallel to psd)
    std::vector<double> col_scale;   // per free column
    double rhs_scale = 1.0;
    double obj_scale = 1.0;
};

struct RayCheck {
    bool valid = false;
    double tau = 0.0;    // rhs . y before normalization
    double error = 0.0;  // normalized violation of the ray conditions
};

// Farkas-type improving ray test on arbitrary problem data: after scaling y
// so that rhs.y = 1, both -A*(y) (every PSD block) and B^T y must vanish up
// to `error`. The error is the absolute defect: any feasible point X would
// satisfy 1 = rhs.y <= error * (trace X + |x_free|_1), so a tiny error rules
// out all feasible points of reasonable size. Normalizing the defect by |y|
// instead would bless huge-norm near-rays that exist even for feasible
// problems.
RayCheck check_ray(const ConicProblem& p, std::vector<double>& y) {
    RayCheck out;
    double tau = 0.0;
    for (std::size_t i = 0; i < p.rhs.size(); ++i) tau += p.rhs[i] * y[i];
    out.tau = tau;
    if (!(tau > 0.0)) return out;
    for (auto& v : y) v /= tau;

    std::vector<MatrixXd> astar(p.blocks.size());
    for (std::size_t j = 0; j < p.blocks.size(); ++j)
        if (p.blocks[j].kind == BlockKind::Psd)
            astar[j] = MatrixXd::Zero(p.blocks[j].size, p.blocks[j].size);
    VectorXd bty;
    int nfree = 0;
    std::vector<int> free_off(p.blocks.size(), 0);
    for (std::size_t j = 0; j < p.blocks.size(); ++j)
        if (p.blocks[j].kind == BlockKind::Free) {
            free_off[j] = nfree;
            nfree += p.blocks[j].size;
        }
    bty = VectorXd::Zero(nfree);

    for (const auto& e : p.A) {
        if (p.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Psd) {
            astar[static_cast<std::size_t>(e.block)](e.r, e.c) +=
                y[static_cast<std::size_t>(e.row)] * e.value;
        } else {
            bty[free_off[static_cast<std::size_t>(e.block)] + e.r] +=
                y[static_cast<std::size_t>(e.row)] * e.value;
        }
    }
    double err = nfree > 0 ? bty.cwiseAbs().maxCoeff() : 0.0;
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
        if (p.blocks[j].kind != BlockKind::Psd) continue;
        MatrixXd Z = astar[j].selfadjointView<Eigen::Upper>();
        Z = -Z;
        if (Z.rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Z, Eigen::EigenvaluesOnly);
        err = std::max(err, -es.eigenvalues().minCoeff());
    }
    out.error = err;
    out.valid = true;
    return out;
}

// Residuals of a candidate primal point on the original data.
double primal_residual_original(const ConicProblem& p, const std::vector<MatrixXd>& X) {
    VectorXd ax = VectorXd::Zero(p.num_rows());
    for (const auto& e : p.A) {
        const auto& blk = X[static_cast<std::size_t>(e.block)];
        double v;
        if (p.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Psd)
            v = e.r == e.c ? e.value * blk(e.r, e.c) : 2.0 * e.value * blk(e.r, e.c);
        else
            v = e.value * blk(e.r, 0);
        ax[e.row] += v;
    }
    double rmax = 0.0, bmax = 0.0;
    for (int i = 0; i < p.num_rows(); ++i) {
        rmax = std::max(rmax, std::abs(p.rhs[static_cast<std::size_t>(i)] - ax[i]));
        bmax = std::max(bmax, std::abs(p.rhs[static_cast<std::size_t>(i)]));
    }
    return rmax / (1.0 + bmax);
}

// Minimum-norm correction of X onto the affine equalities. Moves the point by
// about residual/sigma_min(A), so a strictly interior iterate stays in the
// cone while the equalities become exact to roundoff.
class AffineProjector {
public:
    explicit AffineProjector(const ConicProblem& p) : p_(p), off_(p.blocks.size(), 0) {
        int ncol = 0;
        for (std::size_t j = 0; j < p.blocks.size(); ++j) {
            off_[j] = ncol;
            ncol += p.blocks[j].kind == BlockKind::Free
                        ? p.blocks[j].size
                        : p.blocks[j].size * (p.blocks[j].size + 1) / 2;
        }
        J_ = MatrixXd::Zero(p.num_rows(), ncol);
        for (const auto& e : p.A) {
            const auto j = static_cast<std::size_t>(e.block);
            if (p.blocks[j].kind == BlockKind::Free) {
                J_(e.row, off_[j] + e.r) += e.value;
            } else {
                J_(e.row, off_[j] + tri(p.blocks[j].size, e.r, e.c)) +=
                    e.r == e.c ? e.value : 2.0 * e.value;
            }
        }
        cod_.compute(J_);
    }

    void project(std::vector<MatrixXd>& X, int passes = 2) const {
        for (int pass = 0; pass < passes; ++pass) {
            const VectorXd d = cod_.solve(residual(X));
            apply_tri(X, d, nullptr);
        }
    }

    // Correction measured in the metric of the point itself: the displacement
    // is X^(1/2) W X^(1/2) with W of minimal norm, so thin eigendirections of
    // X move proportionally less and positive definiteness survives
    // corrections well beyond the smallest eigenvalue.
    void project_weighted(std::vector<MatrixXd>& X) const {
        const int m = p_.num_rows();
        std::vector<MatrixXd> Xh(p_.blocks.size());
        MatrixXd Jw(m, J_.cols());
        for (std::size_t j = 0; j < p_.blocks.size(); ++j) {
            const int n = p_.blocks[j].size;
            if (p_.blocks[j].kind == BlockKind::Free) {
                Jw.middleCols(off_[j], n) = J_.middleCols(off_[j], n);
                continue;
            }
            if (n == 0 || X[j].rows() == 0) continue;
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(X[j]);
            const double floor =
                std::max(1e-14, 1e-9 * es.eigenvalues().cwiseAbs().maxCoeff());
            Xh[j] = es.eigenvectors() *
                    es.eigenvalues().cwiseMax(floor).cwiseSqrt().asDiagonal() *
                    es.eigenvectors().transpose();
            const int w = n * (n + 1) / 2;
            const auto Jblk = J_.middleCols(off_[j], w);
            MatrixXd Mrc(n, n);
            VectorXd vtri(w);
            for (int r = 0; r < n; ++r)
                for (int c = r; c < n; ++c) {
                    if (r == c)
                        Mrc.noalias() = Xh[j].col(r) * Xh[j].row(r);
                    else
                        Mrc.noalias() = Xh[j].col(r) * Xh[j].row(c) +
                                        Xh[j].col(c) * Xh[j].row(r);
                    for (int pq = 0; pq < n; ++pq)
                        for (int q = pq; q < n; ++q) vtri[tri(n, pq, q)] = Mrc(pq, q);
                    Jw.col(off_[j] + tri(n, r, c)).noalias() = Jblk * vtri;
                }
        }
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> codw(Jw);
        for (int pass = 0; pass < 2; ++pass) {
            const VectorXd wv = codw.solve(residual(X));
            apply_tri(X, wv, &Xh);
        }
    }

private:
    static int tri(int n, int r, int c) { return r * n - r * (r - 1) / 2 + (c - r); }

    VectorXd residual(const std::vector<MatrixXd>& X) const {
        VectorXd res = Eigen::Map<const VectorXd>(p_.rhs.data(), p_.num_rows());
        for (const auto& e : p_.A) {
            const auto& blk = X[static_cast<std::size_t>(e.block)];
            if (p_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Psd)
                res[e.row] -= e.r == e.c ? e.value * blk(e.r, e.c)
                                         : 2.0 * e.value * blk(e.r, e.c);
            else
                res[e.row] -= e.value * blk(e.r, 0);
        }
        return res;
    }

    // Scatter a packed correction; PSD coordinates pass through the metric
    // factors when given.
    void apply_tri(std::vector<MatrixXd>& X, const VectorXd& d,
                   const std::vector<MatrixXd>* Xh) const {
        for (std::size_t j = 0; j < p_.blocks.size(); ++j) {
            const int n = p_.blocks[j].size;
            if (p_.blocks[j].kind == BlockKind::Free) {
                for (int r = 0; r < n; ++r) X[j](r, 0) += d[off_[j] + r];
                continue;
            }
            if (n == 0 || X[j].rows() == 0) continue;
            MatrixXd Wm(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = r; c < n; ++c) {
                    Wm(r, c) = d[off_[j] + tri(n, r, c)];
                    Wm(c, r) = Wm(r, c);
                }
            if (Xh) {
                const MatrixXd D = (*Xh)[j] * Wm * (*Xh)[j];
                X[j] += 0.5 * (D + D.transpose());
            } else {
                X[j] += Wm;
            }
        }
    }

    const ConicProblem& p_;
    std::vector<int> off_;
    MatrixXd J_;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod_;
};

class Ipm {
public:
    Ipm(const ConicProblem& problem, const SolverOptions& opt)
        : prob_(problem), opt_(opt) {}

    ConicSolution run() {
        assemble();
        if (trivially_infeasible_row_ >= 0) return trivial_infeasible();
        if (work_.psd.empty()) return pure_linear();
        scale();
        return interior_point();
    }

private:
    // ---- assembly & presolve ------------------------------------------

    void assemble() {
        const int m_orig = prob_.num_rows();
        const std::size_t nb = prob_.blocks.size();

        std::vector<int> free_off(nb, -1);
        int nfree_all = 0;
        for (std::size_t j = 0; j < nb; ++j)
            if (prob_.blocks[j].kind == BlockKind::Free) {
                free_off[j] = nfree_all;
                nfree_all += prob_.blocks[j].size;
            }

        std::vector<char> row_used(static_cast<std::size_t>(m_orig), 0);
        std::vector<char> col_used(static_cast<std::size_t>(nfree_all), 0);
        for (const auto& e : prob_.A) {
            if (e.value == 0.0) continue;
            row_used[static_cast<std::size_t>(e.row)] = 1;
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Free)
                col_used[static_cast<std::size_t>(
                    free_off[static_cast<std::size_t>(e.block)] + e.r)] = 1;
        }

        // Rows with no entries are either vacuous (rhs ~ 0, dropped) or an
        // immediate inconsistency certificate.
        double rhs_max = 0.0;
        for (double v : prob_.rhs) rhs_max = std::max(rhs_max, std::abs(v));
        std::vector<int> row_new(static_cast<std::size_t>(m_orig), -1);
        for (int i = 0; i < m_orig; ++i) {
            if (!row_used[static_cast<std::size_t>(i)]) {
                if (std::abs(prob_.rhs[static_cast<std::size_t>(i)]) >
                    1e-12 * (1.0 + rhs_max)) {
                    trivially_infeasible_row_ = i;
                    return;
                }
                continue;
            }
            row_new[static_cast<std::size_t>(i)] = work_.m;
            work_.row_to_orig.push_back(i);
            ++work_.m;
        }

        // Free columns that appear nowhere are pinned to zero.
        std::vector<int> col_new(static_cast<std::size_t>(nfree_all), -1);
        for (std::size_t j = 0; j < nb; ++j) {
            if (prob_.blocks[j].kind != BlockKind::Free) continue;
            for (int k = 0; k < prob_.blocks[j].size; ++k) {
                int flat = free_off[j] + k;
                if (!col_used[static_cast<std::size_t>(flat)]) continue;
                col_new[static_cast<std::size_t>(flat)] = work_.nfree;
                work_.free_cols.emplace_back(static_cast<int>(j), k);
                ++work_.nfree;
            }
        }

        std::vector<int> psd_of_block(nb, -1);
        for (std::size_t j = 0; j < nb; ++j)
            if (prob_.blocks[j].kind == BlockKind::Psd) {
                psd_of_block[j] = static_cast<int>(work_.psd.size());
                PsdBlockData b;
                b.orig_block = static_cast<int>(j);
                b.n = prob_.blocks[j].size;
                b.C = MatrixXd::Zero(b.n, b.n);
                work_.psd.push_back(std::move(b));
            }

        work_.B = MatrixXd::Zero(work_.m, work_.nfree);
        work_.d = VectorXd::Zero(work_.nfree);
        work_.rhs = VectorXd::Zero(work_.m);
        for (int i = 0; i < work_.m; ++i)
            work_.rhs[i] = prob_.rhs[static_cast<std::size_t>(work_.row_to_orig
                                                                  [static_cast<std::size_t>(i)])];

        // (row, r, c) -> summed value, per block, rows compacted.
        std::vector<std::vector<std::tuple<int, int, int, double>>> raw(work_.psd.size());
        for (const auto& e : prob_.A) {
            if (e.value == 0.0) continue;
            int i = row_new[static_cast<std::size_t>(e.row)];
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Free) {
                int k = col_new[static_cast<std::size_t>(
                    free_off[static_cast<std::size_t>(e.block)] + e.r)];
                work_.B(i, k) += e.value;
            } else {
                raw[static_cast<std::size_t>(psd_of_block[static_cast<std::size_t>(e.block)])]
                    .emplace_back(i, e.r, e.c, e.value);
            }
        }
        for (std::size_t pj = 0; pj < work_.psd.size(); ++pj) {
            auto& v = raw[pj];
            std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
                return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
                       std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
            });
            PsdBlockData& blk = work_.psd[pj];
            for (std::size_t t = 0; t < v.size(); ++t) {
                auto [row, r, c, val] = v[t];
                if (!blk.groups.empty() && blk.groups.back().row == row &&
                    !blk.entries.empty() && blk.entries.back().r == r &&
                    blk.entries.back().c == c &&
                    blk.groups.back().end == static_cast<int>(blk.entries.size())) {
                    blk.entries.back().v += val;
                    continue;
                }
                if (blk.groups.empty() || blk.groups.back().row != row)
                    blk.groups.push_back({row, static_cast<int>(blk.entries.size()),
                                          static_cast<int>(blk.entries.size())});
                blk.entries.push_back({r, c, val});
                blk.groups.back().end = static_cast<int>(blk.entries.size());
            }
        }

        for (const auto& e : prob_.objective) {
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Free) {
                int k = col_new[static_cast<std::size_t>(
                    free_off[static_cast<std::size_t>(e.block)] + e.r)];
                if (k >= 0) work_.d[k] += e.value;
                // objective on a pinned (absent) column is constant: ignored
            } else {
                auto& blk =
                    work_.psd[static_cast<std::size_t>(psd_of_block[static_cast<std::size_t>(
                        e.block)])];
                blk.C(e.r, e.c) += e.value;
                if (e.r != e.c) blk.C(e.c, e.r) += e.value;
            }
        }

        work_.row_scale.assign(static_cast<std::size_t>(work_.m), 1.0);
        work_.blk_scale.assign(work_.psd.size(), 1.0);
        work_.col_scale.assign(static_cast<std::size_t>(work_.nfree), 1.0);
    }

    ConicSolution trivial_infeasible() {
        ConicSolution sol;
        sol.status = SolveStatus::Infeasible;
        sol.message = "equality row " + std::to_string(trivially_infeasible_row_) +
                      " has no variables but nonzero right-hand side";
        sol.ray.assign(prob_.rhs.size(), 0.0);
        sol.ray[static_cast<std::size_t>(trivially_infeasible_row_)] =
            1.0 / prob_.rhs[static_cast<std::size_t>(trivially_infeasible_row_)];
        auto rc = check_ray(prob_, sol.ray);
        sol.ray_error = rc.error;
        fill_default_values(sol);
        sol.primal_residual = primal_residual_original(prob_, sol.X);
        return sol;
    }

    // Least-squares path when there are no PSD blocks at all.
    ConicSolution pure_linear() {
        ConicSolution sol;
        sol.y.assign(prob_.rhs.size(), 0.0);
        fill_default_values(sol);
        if (work_.m == 0 || work_.nfree == 0) {
            bool ok = work_.m == 0;
            sol.status = ok ? SolveStatus::Feasible : SolveStatus::Infeasible;
            if (!ok) {
                // No usable variables: any nonzero-rhs row is its own ray.
                sol.ray.assign(prob_.rhs.size(), 0.0);
                int worst = work_.row_to_orig[0];
                for (int i : work_.row_to_orig)
                    if (std::abs(prob_.rhs[static_cast<std::size_t>(i)]) >
                        std::abs(prob_.rhs[static_cast<std::size_t>(worst)]))
                        worst = i;
                sol.ray[static_cast<std::size_t>(worst)] =
                    1.0 / prob_.rhs[static_cast<std::size_t>(worst)];
                auto rc = check_ray(prob_, sol.ray);
                sol.ray_error = rc.error;
                sol.message = "no variables on the constraint rows";
            }
            sol.primal_residual = primal_residual_original(prob_, sol.X);
            return sol;
        }
        Eigen::ColPivHouseholderQR<MatrixXd> qr(work_.B);
        VectorXd u = qr.solve(work_.rhs);
        VectorXd res = work_.rhs - work_.B * u;
        const double rel =
            res.cwiseAbs().maxCoeff() / (1.0 + work_.rhs.cwiseAbs().maxCoeff());
        if (rel <= std::max(opt_.tol, 1e-10)) {
            sol.status = SolveStatus::Feasible;
            store_free(sol, u);
        } else {
            // Least-squares residual is orthogonal to range(B): a ready ray.
            double tau = work_.rhs.dot(res);
            sol.status = SolveStatus::Infeasible;
            sol.ray.assign(prob_.rhs.size(), 0.0);
            for (int i = 0; i < work_.m; ++i)
                sol.ray[static_cast<std::size_t>(work_.row_to_orig[static_cast<std::size_t>(i)])] =
                    res[i] / tau;
            auto rc = check_ray(prob_, sol.ray);
            sol.ray_error = rc.error;
            sol.message = "equality rows on free variables are inconsistent";
        }
        sol.primal_residual = primal_residual_original(prob_, sol.X);
        return sol;
    }

    // ---- scaling -------------------------------------------------------

    void scale() {
        for (int pass = 0; pass < 6; ++pass) {
            // Row pass.
            VectorXd rmax = VectorXd::Zero(work_.m);
            for (auto& blk : work_.psd)
                for (auto& g : blk.groups)
                    for (int t = g.begin; t < g.end; ++t)
                        rmax[g.row] = std::max(rmax[g.row],
                                               std::abs(blk.entries[static_cast<std::size_t>(t)].v));
            for (int i = 0; i < work_.m; ++i)
                for (int k = 0; k < work_.nfree; ++k)
                    rmax[i] = std::max(rmax[i], std::abs(work_.B(i, k)));
            VectorXd rdiv(work_.m);
            for (int i = 0; i < work_.m; ++i)
                rdiv[i] = rmax[i] > 0 ? std::sqrt(rmax[i]) : 1.0;
            for (auto& blk : work_.psd)
                for (auto& g : blk.groups)
                    for (int t = g.begin; t < g.end; ++t)
                        blk.entries[static_cast<std::size_t>(t)].v /= rdiv[g.row];
            for (int i = 0; i < work_.m; ++i) work_.B.row(i) /= rdiv[i];
            for (int i = 0; i < work_.m; ++i)
                work_.row_scale[static_cast<std::size_t>(i)] *= rdiv[i];

            // Column pass: scalar per PSD block, per-column for free vars.
            for (std::size_t pj = 0; pj < work_.psd.size(); ++pj) {
                auto& blk = work_.psd[pj];
                double bmax = 0.0;
                for (const auto& e : blk.entries) bmax = std::max(bmax, std::abs(e.v));
                double div = bmax > 0 ? std::sqrt(bmax) : 1.0;
                for (auto& e : blk.entries) e.v /= div;
                work_.blk_scale[pj] *= div;
            }
            for (int k = 0; k < work_.nfree; ++k) {
                double cmax = work_.B.col(k).cwiseAbs().maxCoeff();
                double div = cmax > 0 ? std::sqrt(cmax) : 1.0;
                work_.B.col(k) /= div;
                work_.col_scale[static_cast<std::size_t>(k)] *= div;
            }
        }
        for (int i = 0; i < work_.m; ++i)
            work_.rhs[i] /= work_.row_scale[static_cast<std::size_t>(i)];
        for (std::size_t pj = 0; pj < work_.psd.size(); ++pj)
            work_.psd[pj].C /= work_.blk_scale[pj];
        for (int k = 0; k < work_.nfree; ++k)
            work_.d[k] /= work_.col_scale[static_cast<std::size_t>(k)];

        work_.rhs_scale = std::max(1.0, work_.rhs.cwiseAbs().maxCoeff());
        work_.rhs /= work_.rhs_scale;
        double cmax = 0.0;
        for (const auto& blk : work_.psd)
            if (blk.n > 0) cmax = std::max(cmax, blk.C.cwiseAbs().maxCoeff());
        if (work_.nfree > 0) cmax = std::max(cmax, work_.d.cwiseAbs().maxCoeff());
        work_.obj_scale = std::max(1.0, cmax);
        for (auto& blk : work_.psd) blk.C /= work_.obj_scale;
        work_.d /= work_.obj_scale;
    }

    // ---- interior point main loop ---------------------------------------

    struct State {
        std::vector<MatrixXd> X, S;
        VectorXd u, y;
    };

    VectorXd apply_A(const State& st) const {
        VectorXd ax = VectorXd::Zero(work_.m);
        for (std::size_t pj = 0; pj < work_.psd.size(); ++pj) {
            const auto& blk = work_.psd[pj];
            const MatrixXd& X = st.X[pj];
            for (const auto& g : blk.groups) {
                double acc = 0.0;
                for (int t = g.begin; t < g.end; ++t) {
                    const PsdEntry& e = blk.entries[static_cast<std::size_t>(t)];
                    acc += e.r == e.c ? e.v * X(e.r, e.c) : 2.0 * e.v * X(e.r, e.c);
                }
                ax[g.row] += acc;
            }
        }
        if (work_.nfree > 0) ax += work_.B * st.u;
        return ax;
    }

    MatrixXd apply_Astar(std::size_t pj, const VectorXd& y) const {
        const auto& blk = work_.psd[pj];
        MatrixXd out = MatrixXd::Zero(blk.n, blk.n);
        for (const auto& g : blk.groups) {
            const double w = y[g.row];
            if (w == 0.0) continue;
            for (int t = g.begin; t < g.end; ++t) {
                const PsdEntry& e = blk.entries[static_cast<std::size_t>(t)];
                out(e.r, e.c) += w * e.v;
            }
        }
        MatrixXd full = out.selfadjointView<Eigen::Upper>();
        return full;
    }

    MatrixXld apply_Astar_ld(std::size_t pj, const VectorXld& y) const {
        const auto& blk = work_.psd[pj];
        MatrixXld out = MatrixXld::Zero(blk.n, blk.n);
        for (const auto& g : blk.groups) {
            const long double w = y[g.row];
            if (w == 0.0L) continue;
            for (int t = g.begin; t < g.end; ++t) {
                const PsdEntry& e = blk.entries[static_cast<std::size_t>(t)];
                out(e.r, e.c) += w * e.v;
            }
        }
        MatrixXld full = out.selfadjointView<Eigen::Upper>();
        return full;
    }

    // Largest step a with M + a*D staying PSD, via eigenvalues of L^-1 D L^-T.
    static double max_step(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& D) {
        MatrixXd Z = llt.matrixL().solve(D);
        MatrixXd Y = llt.matrixL().solve(Z.transpose()).transpose();
        Y = 0.5 * (Y + Y.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Y, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
        return -1.0 / lmin;
    }

    void fill_default_values(ConicSolution& sol) const {
        sol.X.clear();
        sol.S.clear();
        for (const auto& b : prob_.blocks) {
            if (b.kind == BlockKind::Psd) {
                sol.X.push_back(MatrixXd::Zero(b.size, b.size));
                sol.S.push_back(MatrixXd());
            } else {
                sol.X.push_back(MatrixXd::Zero(b.size, 1));
                sol.S.push_back(MatrixXd());
            }
        }
        if (sol.y.empty()) sol.y.assign(prob_.rhs.size(), 0.0);
    }

    void store_free(ConicSolution& sol, const VectorXd& u_scaled) const {
        for (int k = 0; k < work_.nfree; ++k) {
            auto [blk, idx] = work_.free_cols[static_cast<std::size_t>(k)];
            sol.X[static_cast<std::size_t>(blk)](idx, 0) =
                u_scaled[k] * work_.rhs_scale / work_.col_scale[static_cast<std::size_t>(k)];
        }
    }

    ConicSolution interior_point() {
        const int m = work_.m;
        const int nf = work_.nfree;
        const std::size_t np = work_.psd.size();

        State st;
        st.X.resize(np);
        st.S.resize(np);
        int nmax = 1;
        double ntotal = 0.0;
        for (std::size_t pj = 0; pj < np; ++pj) {
            nmax = std::max(nmax, work_.psd[pj].n);
            ntotal += work_.psd[pj].n;
        }
        const double xi_p =
            std::min(1e5, std::max({10.0, 2.0 * std::sqrt(double(nmax)),
                                    2.0 * (1.0 + work_.rhs.cwiseAbs().maxCoeff())}));
        double cmax = 0.0;
        for (const auto& blk : work_.psd) cmax = std::max(cmax, blk.C.cwiseAbs().maxCoeff());
        const double xi_d =
            std::min(1e5, std::max({10.0, 2.0 * std::sqrt(double(nmax)), 2.0 * (1.0 + cmax)}));
        for (std::size_t pj = 0; pj < np; ++pj) {
            st.X[pj] = xi_p * MatrixXd::Identity(work_.psd[pj].n, work_.psd[pj].n);
            st.S[pj] = xi_d * MatrixXd::Identity(work_.psd[pj].n, work_.psd[pj].n);
        }
        st.u = VectorXd::Zero(nf);
        st.y = VectorXd::Zero(m);

        ConicSolution sol;
        fill_default_values(sol);

        const double tol_p = opt_.tol;
        const double tol_d = std::max(100.0 * opt_.tol, 1e-7);
        const double tol_g = std::max(100.0 * opt_.tol, 1e-6);

        double best_merit = std::numeric_limits<double>::infinity();
        int best_iter = 0;
        int tiny_steps = 0;
        int iter = 0;
        std::string end_message;
        SolveStatus status = SolveStatus::IterationLimit;

        // Chasing the duality gap on degenerate problems can wreck primal
        // feasibility late in the run; keep the best iterate seen and report
        // it instead of whatever the last step left behind.
        State snap = st;
        double snap_merit = std::numeric_limits<double>::infinity();

        // The Schur complement turns brutally ill-conditioned as mu -> 0 on
        // degenerate (non-Slater) problems; assembling and solving it in
        // extended precision keeps the directions usable well past the point
        // where double-precision arithmetic poisons the iterates.
        MatrixXld Ml(m, m), Kaugl(m + nf, m + nf);
        const MatrixXld Bl = nf > 0 ? MatrixXld(work_.B.cast<long double>()) : MatrixXld();
        std::vector<MatrixXd> Rd(np), dXa(np), dSa(np), dX(np), dS(np);
        std::vector<MatrixXld> Xl(np), Sl(np), Sinvl(np), Rdl(np), Gl(np), Ktl(np);
        std::vector<Eigen::LLT<MatrixXd>> lltX(np), lltS(np);

        auto relp_of = [&](const VectorXd& rp) {
            return rp.cwiseAbs().maxCoeff() / (1.0 + work_.rhs.cwiseAbs().maxCoeff());
        };

        for (iter = 0; iter < opt_.max_iter; ++iter) {
            // Residuals and convergence metrics.
            VectorXd rp = work_.rhs - apply_A(st);
            double reld_num = 0.0;
            for (std::size_t pj = 0; pj < np; ++pj) {
                Rd[pj] = work_.psd[pj].C - apply_Astar(pj, st.y) - st.S[pj];
                reld_num = std::max(reld_num, Rd[pj].cwiseAbs().maxCoeff());
            }
            VectorXd rfree;
            if (nf > 0) {
                rfree = work_.d - work_.B.transpose() * st.y;
                reld_num = std::max(reld_num, rfree.cwiseAbs().maxCoeff());
            }
            double pobj = st.u.size() > 0 ? work_.d.dot(st.u) : 0.0;
            double gap_num = 0.0;
            for (std::size_t pj = 0; pj < np; ++pj) {
                pobj += work_.psd[pj].C.cwiseProduct(st.X[pj]).sum();
                gap_num += st.X[pj].cwiseProduct(st.S[pj]).sum();
            }
            const double dobj = work_.rhs.dot(st.y);
            const double mu = gap_num / ntotal;
            const double relp = relp_of(rp);
            const double reld = reld_num / (1.0 + cmax);
            const double relg = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

            if (!std::isfinite(relp) || !std::isfinite(reld) || !std::isfinite(mu)) {
                status = SolveStatus::Inaccurate;
                end_message = "non-finite iterate";
                break;
            }
            if (opt_.verbose)
                std::fprintf(stderr, "iter %3d  mu %.3e  relp %.3e  reld %.3e  relg %.3e\n",
                             iter, mu, relp, reld, relg);
            if (relp <= tol_p && reld <= tol_d && relg <= tol_g) {
                status = SolveStatus::Feasible;
                break;
            }

            // Infeasibility: test the (normalized) dual iterate as a ray.
            if (iter >= 3 && dobj > 0.0) {
                double yn = st.y.norm();
                if (yn > 0) {
                    // Cheap scaled-space screen before the exact test.
                    double tau_s = dobj / yn;
                    double screen = 0.0;
                    VectorXd ys = st.y / yn;
                    for (std::size_t pj = 0; pj < np; ++pj) {
                        MatrixXd Z = -apply_Astar(pj, ys);
                        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Z, Eigen::EigenvaluesOnly);
                        screen = std::max(screen, -es.eigenvalues().minCoeff());
                    }
                    if (nf > 0)
                        screen = std::max(screen,
                                          (work_.B.transpose() * ys).cwiseAbs().maxCoeff());
                    if (screen <= 1e-7 * tau_s) {
                        std::vector<double> ray(prob_.rhs.size(), 0.0);
                        for (int i = 0; i < m; ++i)
                            ray[static_cast<std::size_t>(
                                work_.row_to_orig[static_cast<std::size_t>(i)])] =
                                st.y[i] / work_.row_scale[static_cast<std::size_t>(i)];
                        auto rc = check_ray(prob_, ray);
                        if (rc.valid && rc.error <= 1e-7) {
                            sol.status = SolveStatus::Infeasible;
                            sol.ray = std::move(ray);
                            sol.ray_error = rc.error;
                            sol.iterations = iter;
                            sol.message = "dual improving ray certifies infeasibility";
                            finalize(sol, st);
                            return sol;
                        }
                    }
                }
            }

            const double merit = std::max({relp, reld, relg});
            if (merit < snap_merit) {
                snap_merit = merit;
                snap = st;
            }
            if (merit < 0.92 * best_merit) {
                best_merit = merit;
                best_iter = iter;
            } else if (iter - best_iter > 25) {
                status = SolveStatus::Inaccurate;
                end_message = "progress stalled";
                break;
            }

            // Factor the iterates; nudge marginally indefinite ones back.
            bool fact_ok = true;
            for (std::size_t pj = 0; pj < np; ++pj) {
                lltX[pj].compute(st.X[pj]);
                if (lltX[pj].info() != Eigen::Success) {
                    nudge_psd(st.X[pj]);
                    lltX[pj].compute(st.X[pj]);
                    if (lltX[pj].info() != Eigen::Success) fact_ok = false;
                }
                lltS[pj].compute(st.S[pj]);
                if (lltS[pj].info() != Eigen::Success) {
                    nudge_psd(st.S[pj]);
                    lltS[pj].compute(st.S[pj]);
                    if (lltS[pj].info() != Eigen::Success) fact_ok = false;
                }
                if (!fact_ok) break;
                Xl[pj] = st.X[pj].cast<long double>();
                Sl[pj] = st.S[pj].cast<long double>();
                Rdl[pj] = Rd[pj].cast<long double>();
                const Eigen::LLT<MatrixXld> ls(Sl[pj]);
                Sinvl[pj] =
                    ls.info() == Eigen::Success
                        ? MatrixXld(ls.solve(MatrixXld::Identity(work_.psd[pj].n,
                                                                 work_.psd[pj].n)))
                        : MatrixXld(lltS[pj]
                                        .solve(MatrixXd::Identity(work_.psd[pj].n,
                                                                  work_.psd[pj].n))
                                        .cast<long double>());
            }
            if (!fact_ok) {
                status = SolveStatus::Inaccurate;
                end_message = "iterate lost positive definiteness";
                break;
            }

            build_schur(Xl, Sinvl, Ml);
            const double mdiag = static_cast<double>(Ml.diagonal().cwiseAbs().maxCoeff());
            const long double delta = 1e-13L * std::max(1.0, mdiag);
            Kaugl.setZero(m + nf, m + nf);
            Kaugl.topLeftCorner(m, m) = Ml + delta * MatrixXld::Identity(m, m);
            if (nf > 0) {
                Kaugl.topRightCorner(m, nf) = Bl;
                Kaugl.bottomLeftCorner(nf, m) = Bl.transpose();
                Kaugl.bottomRightCorner(nf, nf) = -delta * MatrixXld::Identity(nf, nf);
            }
            const Eigen::PartialPivLU<MatrixXld> lu(Kaugl);

            auto solve_direction = [&](VectorXd& dy, VectorXd& du,
                                       std::vector<MatrixXd>& dSout,
                                       std::vector<MatrixXd>& dXout) {
                VectorXld h = rp.cast<long double>();
                for (std::size_t pj = 0; pj < np; ++pj) {
                    Gl[pj] = (Ktl[pj] - Xl[pj] * Rdl[pj]) * Sinvl[pj];
                    for (const auto& g : work_.psd[pj].groups)
                        h[g.row] -= sym_inner(work_.psd[pj], g, Gl[pj]);
                }
                VectorXld rhs_aug(m + nf);
                rhs_aug.head(m) = h;
                if (nf > 0) rhs_aug.tail(nf) = rfree.cast<long double>();
                VectorXld solvec = lu.solve(rhs_aug);
                for (int refine = 0; refine < 3; ++refine) {
                    VectorXld res(m + nf);
                    res.head(m) = rhs_aug.head(m) - Ml * solvec.head(m);
                    if (nf > 0) {
                        res.head(m) -= Bl * solvec.tail(nf);
                        res.tail(nf) = rhs_aug.tail(nf) - Bl.transpose() * solvec.head(m);
                    }
                    solvec += lu.solve(res);
                }
                const VectorXld dyl = solvec.head(m);
                dy = dyl.cast<double>();
                du = solvec.tail(nf).cast<double>();
                for (std::size_t pj = 0; pj < np; ++pj) {
                    const MatrixXld dSl = Rdl[pj] - apply_Astar_ld(pj, dyl);
                    const MatrixXld raw = (Ktl[pj] - Xl[pj] * dSl) * Sinvl[pj];
                    dXout[pj] = (0.5L * (raw + raw.transpose())).cast<double>();
                    dSout[pj] = dSl.cast<double>();
                }
            };

            // Predictor.
            for (std::size_t pj = 0; pj < np; ++pj) Ktl[pj] = -Xl[pj] * Sl[pj];
            VectorXd dy_a, du_a;
            solve_direction(dy_a, du_a, dSa, dXa);
            double ap_a = 1.0, ad_a = 1.0;
            for (std::size_t pj = 0; pj < np; ++pj) {
                ap_a = std::min(ap_a, max_step(lltX[pj], dXa[pj]));
                ad_a = std::min(ad_a, max_step(lltS[pj], dSa[pj]));
            }
            double gap_aff = 0.0;
            for (std::size_t pj = 0; pj < np; ++pj)
                gap_aff += (st.X[pj] + ap_a * dXa[pj])
                               .cwiseProduct(st.S[pj] + ad_a * dSa[pj])
                               .sum();
            gap_aff = std::max(0.0, gap_aff);
            double sigma = gap_num > 0 ? std::pow(gap_aff / gap_num, 3.0) : 0.1;
            sigma = std::clamp(sigma, 1e-8, 1.0);

            // Corrector.
            for (std::size_t pj = 0; pj < np; ++pj)
                Ktl[pj] = static_cast<long double>(sigma * mu) *
                              MatrixXld::Identity(work_.psd[pj].n, work_.psd[pj].n) -
                          Xl[pj] * Sl[pj] -
                          dXa[pj].cast<long double>() * dSa[pj].cast<long double>();
            VectorXd dy, du;
            solve_direction(dy, du, dS, dX);

            const double gamma = iter < 2 ? 0.9 : 0.98;
            double ap = 1.0, ad = 1.0;
            for (std::size_t pj = 0; pj < np; ++pj) {
                ap = std::min(ap, gamma * max_step(lltX[pj], dX[pj]));
                ad = std::min(ad, gamma * max_step(lltS[pj], dS[pj]));
            }
            ap = std::min(ap, 1.0);
            ad = std::min(ad, 1.0);

            for (std::size_t pj = 0; pj < np; ++pj) {
                st.X[pj] += ap * dX[pj];
                st.X[pj] = 0.5 * (st.X[pj] + st.X[pj].transpose()).eval();
                st.S[pj] += ad * dS[pj];
                st.S[pj] = 0.5 * (st.S[pj] + st.S[pj].transpose()).eval();
            }
            if (nf > 0) st.u += ap * du;
            st.y += ad * dy;

            if (std::max(ap, ad) < 1e-8) {
                if (++tiny_steps >= 3) {
                    status = SolveStatus::Inaccurate;
                    end_message = "step sizes collapsed";
                    ++iter;
                    break;
                }
            } else {
                tiny_steps = 0;
            }
        }

        // Ran out of iterations or stalled: one last ray attempt.
        if (status != SolveStatus::Feasible) {
            std::vector<double> ray(prob_.rhs.size(), 0.0);
            for (int i = 0; i < m; ++i)
                ray[static_cast<std::size_t>(work_.row_to_orig[static_cast<std::size_t>(i)])] =
                    st.y[i] / work_.row_scale[static_cast<std::size_t>(i)];
            auto rc = check_ray(prob_, ray);
            if (rc.valid && rc.error <= 1e-7) {
                status = SolveStatus::Infeasible;
                sol.ray = std::move(ray);
                sol.ray_error = rc.error;
                end_message = "dual improving ray certifies infeasibility";
            }
        }

        sol.status = status;
        sol.iterations = iter;
        sol.message = end_message;
        finalize(sol, status == SolveStatus::Feasible ? st : snap);

        // Never report Feasible unless the unscaled residual actually meets
        // the contract.
        if (sol.status == SolveStatus::Feasible && sol.primal_residual > opt_.tol) {
            sol.status = SolveStatus::Inaccurate;
            sol.message = "converged in scaled space but original residual " +
                          num_repr(sol.primal_residual) + " exceeds tolerance";
        }
        return sol;
    }

    static void nudge_psd(MatrixXd& M) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        const double shift = std::max(0.0, -lmin) + 1e-14 * (1.0 + std::abs(M.trace()));
        M += shift * MatrixXd::Identity(M.rows(), M.cols());
    }

    // M_ik = sum_j <A_i, X_j A_k S_j^-1>; upper triangle built then mirrored.
    void build_schur(const std::vector<MatrixXld>& X, const std::vector<MatrixXld>& Sinv,
                     MatrixXld& M) const {
        M.setZero();
        for (std::size_t pj = 0; pj < work_.psd.size(); ++pj) {
            const auto& blk = work_.psd[pj];
            const int n = blk.n;
            MatrixXld W1(n, n), Tk(n, n);
            std::vector<int> touched;
            for (std::size_t gk = 0; gk < blk.groups.size(); ++gk) {
                const RowGroup& rk = blk.groups[gk];
                touched.clear();
                for (int t = rk.begin; t < rk.end; ++t) {
                    touched.push_back(blk.entries[static_cast<std::size_t>(t)].r);
                    touched.push_back(blk.entries[static_cast<std::size_t>(t)].c);
                }
                std::sort(touched.begin(), touched.end());
                touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
                for (int t : touched) W1.row(t).setZero();
                for (int t = rk.begin; t < rk.end; ++t) {
                    const PsdEntry& e = blk.entries[static_cast<std::size_t>(t)];
                    W1.row(e.r) += e.v * Sinv[pj].row(e.c);
                    if (e.r != e.c) W1.row(e.c) += e.v * Sinv[pj].row(e.r);
                }
                Tk.setZero();
                for (int t : touched) Tk.noalias() += X[pj].col(t) * W1.row(t);
                for (std::size_t gi = 0; gi <= gk; ++gi) {
                    const RowGroup& ri = blk.groups[gi];
                    M(ri.row, rk.row) += sym_inner(blk, ri, Tk);
                }
            }
        }
        M = M.selfadjointView<Eigen::Upper>();
    }

    // Unscale the iterate into the solution struct and attach true residuals.
    void finalize(ConicSolution& sol, const State& st) const {
        for (std::size_t pj = 0; pj < work_.psd.size(); ++pj) {
            const auto& blk = work_.psd[pj];
            sol.X[static_cast<std::size_t>(blk.orig_block)] =
                st.X[pj] * (work_.rhs_scale / work_.blk_scale[pj]);
            sol.S[static_cast<std::size_t>(blk.orig_block)] =
                st.S[pj] * (work_.blk_scale[pj] * work_.obj_scale);
        }
        store_free(sol, st.u);
        sol.y.assign(prob_.rhs.size(), 0.0);
        for (int i = 0; i < work_.m; ++i)
            sol.y[static_cast<std::size_t>(work_.row_to_orig[static_cast<std::size_t>(i)])] =
                st.y[i] * work_.obj_scale / work_.row_scale[static_cast<std::size_t>(i)];

        sol.primal_residual = primal_residual_original(prob_, sol.X);
        sol.dual_residual = dual_residual_original(sol);
        sol.gap = duality_gap_original(sol);
    }

    double dual_residual_original(const ConicSolution& sol) const {
        double num = 0.0, den = 1.0;
        for (std::size_t j = 0; j < prob_.blocks.size(); ++j) {
            if (prob_.blocks[j].kind != BlockKind::Psd) continue;
            MatrixXd R = MatrixXd::Zero(prob_.blocks[j].size, prob_.blocks[j].size);
            for (const auto& e : prob_.objective)
                if (e.block == static_cast<int>(j)) {
                    R(e.r, e.c) += e.value;
                    if (e.r != e.c) R(e.c, e.r) += e.value;
                }
            for (const auto& e : prob_.A)
                if (e.block == static_cast<int>(j)) {
                    R(e.r, e.c) -= sol.y[static_cast<std::size_t>(e.row)] * e.value;
                    if (e.r != e.c) R(e.c, e.r) -= sol.y[static_cast<std::size_t>(e.row)] * e.value;
                }
            if (sol.S[j].size() > 0) R -= sol.S[j];
            if (R.size() > 0) num = std::max(num, R.cwiseAbs().maxCoeff());
        }
        // Free part: d - B^T y must vanish.
        std::vector<double> rf;
        for (std::size_t j = 0; j < prob_.blocks.size(); ++j)
            if (prob_.blocks[j].kind == BlockKind::Free)
                rf.resize(rf.size() + static_cast<std::size_t>(prob_.blocks[j].size), 0.0);
        std::size_t off = 0;
        std::vector<std::size_t> off_of(prob_.blocks.size(), 0);
        for (std::size_t j = 0; j < prob_.blocks.size(); ++j)
            if (prob_.blocks[j].kind == BlockKind::Free) {
                off_of[j] = off;
                off += static_cast<std::size_t>(prob_.blocks[j].size);
            }
        for (const auto& e : prob_.objective)
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Free)
                rf[off_of[static_cast<std::size_t>(e.block)] + static_cast<std::size_t>(e.r)] +=
                    e.value;
        for (const auto& e : prob_.A)
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Free)
                rf[off_of[static_cast<std::size_t>(e.block)] + static_cast<std::size_t>(e.r)] -=
                    sol.y[static_cast<std::size_t>(e.row)] * e.value;
        for (double v : rf) num = std::max(num, std::abs(v));
        for (const auto& e : prob_.objective) den = std::max(den, 1.0 + std::abs(e.value));
        return num / den;
    }

    double duality_gap_original(const ConicSolution& sol) const {
        double pobj = 0.0;
        for (const auto& e : prob_.objective) {
            const auto& X = sol.X[static_cast<std::size_t>(e.block)];
            if (prob_.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Psd)
                pobj += e.r == e.c ? e.value * X(e.r, e.c) : 2.0 * e.value * X(e.r, e.c);
            else
                pobj += e.value * X(e.r, 0);
        }
        double dobj = 0.0;
        for (std::size_t i = 0; i < prob_.rhs.size(); ++i) dobj += prob_.rhs[i] * sol.y[i];
        return std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    }

    const ConicProblem& prob_;
    SolverOptions opt_;
    WorkData work_;
    int trivially_infeasible_row_ = -1;
};

}  // namespace

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options) {
    if (!(options.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
    problem.validate();
    Ipm ipm(problem, options);
    return ipm.run();
}

ConicSolution solve_max_margin(const ConicProblem& problem, const SolverOptions& options) {
    ConicProblem ext = problem;
    int fblk = -1;
    for (std::size_t b = 0; b < ext.blocks.size(); ++b)
        if (ext.blocks[b].kind == BlockKind::Free) {
            fblk = static_cast<int>(b);
            break;
        }
    const bool fresh_block = fblk < 0;
    if (fresh_block) {
        fblk = static_cast<int>(ext.blocks.size());
        ext.blocks.push_back({BlockKind::Free, 1});
    }
    const int lam = fresh_block ? 0 : ext.blocks[static_cast<std::size_t>(fblk)].size++;

    // Substituting X_j = Y_j + lambda*I makes lambda's column the sum of each
    // row's diagonal PSD coefficients.
    std::vector<double> lam_col(static_cast<std::size_t>(problem.num_rows()), 0.0);
    for (const ConicEntry& e : problem.A)
        if (problem.blocks[static_cast<std::size_t>(e.block)].kind == BlockKind::Psd &&
            e.r == e.c)
            lam_col[static_cast<std::size_t>(e.row)] += e.value;
    for (int i = 0; i < problem.num_rows(); ++i)
        if (lam_col[static_cast<std::size_t>(i)] != 0.0)
            ext.A.push_back({i, fblk, lam, lam, lam_col[static_cast<std::size_t>(i)]});
    ext.objective.push_back({fblk, lam, lam, -1.0});

    ConicSolution sol = solve(ext, options);
    const double margin =
        sol.X.empty() ? 0.0 : sol.X[static_cast<std::size_t>(fblk)](lam, 0);

    // Fold the margin back into the PSD blocks and restore original shapes.
    if (!sol.X.empty()) {
        for (std::size_t j = 0; j < problem.blocks.size(); ++j)
            if (problem.blocks[j].kind == BlockKind::Psd)
                sol.X[j].diagonal().array() += margin;
        if (fresh_block) {
            sol.X.pop_back();
            if (sol.S.size() > problem.blocks.size()) sol.S.pop_back();
        } else {
            sol.X[static_cast<std::size_t>(fblk)].conservativeResize(lam, 1);
        }
        // Land exactly on the equalities: alternate the metric-weighted
        // projection (restores the equalities while moving thin
        // eigendirections proportionally little) with clamping stray negative
        // eigenvalues to zero. Accept the affine-exact candidate once its
        // worst relative eigenvalue clears what a PSD check at certificate
        // scale can tell from zero; otherwise keep the raw iterate, which is
        // strictly inside the cone with the equalities holding to the
        // iterate's residual.
        std::vector<MatrixXd> cand = sol.X;
        const AffineProjector proj(problem);
        double best_worst = -std::numeric_limits<double>::infinity();
        std::vector<MatrixXd> best;
        for (int round = 0; round < 25; ++round) {
            proj.project_weighted(cand);
            double worst = 0.0;
            for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
                if (problem.blocks[j].kind != BlockKind::Psd || cand[j].rows() == 0)
                    continue;
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(cand[j], Eigen::EigenvaluesOnly);
                const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
                worst = std::min(worst, es.eigenvalues().minCoeff() / scale);
            }
            if (options.verbose)
                std::fprintf(stderr, "landing round %d: worst %.3e\n", round, worst);
            if (worst > best_worst) {
                best_worst = worst;
                best = cand;
                if (worst >= -5e-13) break;
            }
            for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
                if (problem.blocks[j].kind != BlockKind::Psd || cand[j].rows() == 0)
                    continue;
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(cand[j]);
                if (es.eigenvalues().minCoeff() < 0.0)
                    cand[j] = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                              es.eigenvectors().transpose();
            }
        }
        if (best_worst >= -5e-9) sol.X = std::move(best);
        sol.primal_residual = primal_residual_original(problem, sol.X);
    }

    std::ostringstream os;
    os << "feasibility margin " << margin;
    if (!sol.message.empty()) os << "; " << sol.message;
    sol.message = os.str();

    if (margin < -1e2 * options.tol) {
        // The best achievable margin is clearly negative: the equalities are
        // incompatible with the cone, and the margin problem's multipliers
        // double as an improving-ray candidate for the original problem.
        std::vector<double> ray = sol.y;
        RayCheck rc = check_ray(problem, ray);
        if (rc.valid && rc.error <= 1e-7) {
            sol.status = SolveStatus::Infeasible;
            sol.ray = std::move(ray);
            sol.ray_error = rc.error;
        } else if (sol.status == SolveStatus::Feasible) {
            sol.status = SolveStatus::Inaccurate;
        }
    }
    return sol;
}

}  // namespace sampcert
