#pragma once

#include "sampcert/conic.hpp"
#include "sampcert/poly.hpp"

#include <map>
#include <optional>
#include <vector>

namespace sampcert {

/// Polynomial-valued expression affine in a program's scalar unknowns:
/// constant + sum_k coeff_k(vars) * unknown_k. Products of two unknowns are
/// unrepresentable by construction, which keeps every constraint linear.
class LinearPoly {
public:
    explicit LinearPoly(VarSetPtr vars);

    static LinearPoly from_poly(Polynomial p);
    static LinearPoly from_unknown(int id, Polynomial coefficient);

    const VarSetPtr& varset() const { return vars_; }
    /// Keyed by unknown id; key -1 holds the constant polynomial part.
    const std::map<int, Polynomial>& parts() const { return parts_; }

    std::optional<int> degree() const;

    LinearPoly& operator+=(const LinearPoly& rhs);
    LinearPoly& operator-=(const LinearPoly& rhs);
    LinearPoly operator+(const LinearPoly& rhs) const;
    LinearPoly operator-(const LinearPoly& rhs) const;
    LinearPoly operator-() const;
    LinearPoly operator*(double s) const;
    /// Multiply every part by a fixed polynomial (stays affine in unknowns).
    LinearPoly times(const Polynomial& p) const;

    LinearPoly derivative(std::string_view var) const;
    LinearPoly substitute(const std::map<std::string, Polynomial>& bindings) const;
    LinearPoly substitute_values(const std::map<std::string, double>& bindings) const;
    LinearPoly embedded(VarSetPtr target) const;

    /// Concrete polynomial once every referenced unknown has a value.
    Polynomial instantiate(const std::vector<double>& unknown_values) const;

private:
    void add_part(int id, const Polynomial& p);

    VarSetPtr vars_;
    std::map<int, Polynomial> parts_;
};

/// Polynomial with one free scalar unknown per basis monomial.
struct DecisionPoly {
    VarSetPtr vars;
    std::vector<Monomial> basis;
    std::vector<int> ids;  // unknown id per basis element

    LinearPoly expr() const;
    Polynomial value(const std::vector<double>& unknown_values) const;
};

/// Sum-of-squares polynomial Z^T Q Z over a half-degree monomial basis Z,
/// with Q a symmetric matrix of unknowns constrained PSD at compile time.
struct SosPoly {
    VarSetPtr vars;
    std::vector<Monomial> half_basis;
    int sos_index = -1;  // position among the program's SOS polys
    std::vector<int> gram_ids;  // upper triangle, row-major: (i,j), i<=j

    int dim() const { return static_cast<int>(half_basis.size()); }
    int id_at(int i, int j) const;  // i <= j

    LinearPoly expr() const;
    /// Sum of diagonal Gram unknowns, as a constraint-ready expression.
    LinearPoly trace() const;
    Eigen::MatrixXd gram(const std::vector<double>& unknown_values) const;
};

/// Expand a numeric Gram matrix against a monomial basis: sum_ij G_ij m_i m_j.
Polynomial gram_to_poly(VarSetPtr vars, const std::vector<Monomial>& half_basis,
                        const Eigen::MatrixXd& G);

struct CompiledProgram {
    ConicProblem problem;
    int free_block = -1;              // conic block holding decision coefficients
    std::vector<int> psd_block;       // conic block per SOS poly (by sos_index)
    std::vector<double> trace_weight; // objective weight applied per SOS poly

    /// Unknown values (decision coefficients and Gram entries) recovered from
    /// a solver run, indexed by unknown id.
    std::vector<double> extract(const ConicSolution& solution) const;

    // Location tables, indexed by unknown id.
    struct Loc {
        int kind;  // 0 free, 1 gram
        int block;
        int r, c;
    };
    std::vector<Loc> locs;
};

/// Builder for SOS feasibility programs: decision polynomials, SOS decision
/// polynomials, exact coefficient-matching equalities, Positivstellensatz
/// combinations, and compilation to a free+PSD conic problem. All decision
/// objects share one scalar-unknown table, so reusing an expression across
/// constraints couples them automatically.
class SosProgram {
public:
    DecisionPoly new_decision_poly(VarSetPtr vars, int degree);
    DecisionPoly new_decision_poly(VarSetPtr vars, std::vector<Monomial> basis);
    SosPoly new_sos_poly(VarSetPtr vars, int degree);  // degree even
    SosPoly new_sos_poly(VarSetPtr vars, std::vector<Monomial> half_basis);

    /// One equality row per monomial in the union of supports. Coefficients
    /// with magnitude <= 1e-14 are pruned; a row left with no unknowns but a
    /// nonzero right-hand side is a structural error naming the monomial.
    void assert_poly_eq(const LinearPoly& lhs, const LinearPoly& rhs);

    struct PsatzHandles {
        SosPoly s0;
        std::vector<SosPoly> s;
    };
    /// Assert target == s0 + sum_i s_i * g_i with fresh SOS multipliers.
    /// Degrees default to: deg(s0) = even ceil of deg(target); deg(s_i) =
    /// even ceil of deg(target) - deg(g_i), floored at 0.
    PsatzHandles psatz_combine(const LinearPoly& target,
                               const std::vector<Polynomial>& localizers,
                               const std::vector<int>* degrees = nullptr);

    int unknown_count() const { return next_id_; }
    std::size_t row_count() const { return rows_.size(); }

    /// Weight of an optional objective (sum of Gram traces) emitted by
    /// compile. Off by default: feasibility problems solve fastest with no
    /// objective, and any minimization drags the iterates onto a degenerate
    /// optimal face.
    void set_trace_objective_weight(double w) { trace_weight_ = w; }

    /// Deterministic conic encoding: free block first (when any decision
    /// coefficients exist), then one PSD block per SOS poly in creation
    /// order; rows in assertion order.
    CompiledProgram compile() const;

private:
    struct Row {
        std::map<int, double> coeff;
        double rhs = 0.0;
        std::string label;
    };

    int fresh_id() { return next_id_++; }

    int next_id_ = 0;
    std::vector<int> decision_ids_;  // ids living in the free block
    std::vector<SosPoly> sos_polys_;
    std::vector<Row> rows_;
    double trace_weight_ = 0.0;
};

}  // namespace sampcert
