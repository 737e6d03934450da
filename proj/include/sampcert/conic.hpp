#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace sampcert {

/// A conic feasibility/optimization problem over a product of free scalar
/// blocks and PSD matrix blocks:
///
///   minimize    sum_j <C_j, X_j> + d.u
///   subject to  sum_j <A_ij, X_j> + b_i.u = rhs_i   (i = 0..m-1)
///               X_j PSD for PSD blocks, u unrestricted.
///
/// PSD data is stored upper-triangle only (r <= c); an off-diagonal entry v
/// denotes the symmetric pair, so it contributes 2*v*X(r,c) to <A,X>. Free
/// block entries use r == c == scalar index within the block.
enum class BlockKind { Free, Psd };

struct Block {
    BlockKind kind;
    int size;  // scalar count (Free) or matrix dimension (Psd)
};

struct ConicEntry {
    int row;
    int block;
    int r;
    int c;
    double value;
};

struct ObjectiveEntry {
    int block;
    int r;
    int c;
    double value;
};

struct ConicProblem {
    std::vector<Block> blocks;
    std::vector<ConicEntry> A;
    std::vector<double> rhs;
    std::vector<ObjectiveEntry> objective;
    std::vector<std::string> row_labels;  // optional; empty or one per row

    int num_rows() const { return static_cast<int>(rhs.size()); }

    /// Throws std::invalid_argument on out-of-range indices, lower-triangle
    /// PSD entries, or label-count mismatch.
    void validate() const;

    /// Deterministic sparse text dump, one line per datum:
    ///   blocks <n>            / block <i> free|psd <size>
    ///   rows <m>              / A <row> <block> <r> <c> <value>
    ///   rhs <row> <value>     / obj <block> <r> <c> <value>
    /// Values print as shortest round-trip decimals, so equal problems
    /// produce byte-identical dumps.
    std::string dump() const;
};

enum class SolveStatus { Feasible, Infeasible, Inaccurate, IterationLimit };

const char* to_string(SolveStatus s);

struct ConicSolution {
    SolveStatus status = SolveStatus::Inaccurate;
    /// Per block: PSD blocks get a size x size symmetric matrix, free blocks
    /// a size x 1 column vector.
    std::vector<Eigen::MatrixXd> X;
    std::vector<double> y;               // equality multipliers
    std::vector<Eigen::MatrixXd> S;      // dual slack per PSD block (empty for free)
    double primal_residual = 0.0;        // relative infinity norm, original data
    double dual_residual = 0.0;
    double gap = 0.0;                    // relative duality gap
    int iterations = 0;
    /// Improving ray: when Infeasible, a vector yr with rhs.yr = 1,
    /// -sum_i yr_i A_ij PSD (within ray_error) and B^T yr ~ 0, which proves
    /// no feasible point exists.
    std::vector<double> ray;
    double ray_error = 0.0;
    std::string message;
};

struct SolverOptions {
    double tol = 1e-8;     // relative primal equality tolerance
    int max_iter = 200;
    bool verbose = false;
};

/// Deterministic primal-dual interior-point solve. Feasible solutions satisfy
/// the equalities to tol (relative infinity norm, recomputed on the original
/// unscaled data) with all PSD blocks positive definite by construction.
ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {});

/// Phase-I variant: adds one scalar lambda, maximizes it subject to the same
/// equalities with every PSD block shifted to X_j - lambda*I PSD, and folds
/// the optimal shift back into the returned blocks (the margin is reported in
/// `message`). The shifted problem is strictly feasible even when the original
/// feasible set has empty relative interior — exactly the case where the plain
/// path-following iteration has no central path to follow and stalls. A
/// clearly negative margin maps to Infeasible when the multipliers pass the
/// improving-ray test.
ConicSolution solve_max_margin(const ConicProblem& problem, const SolverOptions& options = {});

/// (is_psd, min_eigenvalue) via symmetric eigendecomposition; is_psd iff
/// min eig >= -tol. Throws std::invalid_argument if the input is asymmetric
/// beyond 1e-12 relative.
std::pair<bool, double> check_psd(const Eigen::MatrixXd& m, double tol);

}  // namespace sampcert
