#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sampcert {

/// Ordered set of variable names. Indices are fixed at creation and shared by
/// every polynomial built over the set.
class VarSet {
public:
    explicit VarSet(std::vector<std::string> names);

    static std::shared_ptr<const VarSet> create(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<std::size_t> index_of(std::string_view name) const;
    /// Index of a known variable; throws std::invalid_argument otherwise.
    std::size_t require(std::string_view name) const;

    bool operator==(const VarSet& other) const { return names_ == other.names_; }
    bool operator!=(const VarSet& other) const { return !(*this == other); }

    std::string joined() const;  // "t,x1,z1" style, for diagnostics

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

using VarSetPtr = std::shared_ptr<const VarSet>;

/// Exponent vector over a VarSet; total degree is cached.
class Monomial {
public:
    explicit Monomial(std::vector<int> exponents);

    static Monomial one(std::size_t nvars);

    int degree() const { return degree_; }
    std::size_t nvars() const { return exps_.size(); }
    int exponent(std::size_t i) const { return exps_[i]; }
    const std::vector<int>& exponents() const { return exps_; }

    Monomial times(const Monomial& other) const;

    bool operator==(const Monomial& other) const { return exps_ == other.exps_; }
    bool operator!=(const Monomial& other) const { return !(*this == other); }

private:
    std::vector<int> exps_;
    int degree_ = 0;
};

/// Graded lexicographic order, ascending: lower total degree first; within a
/// degree, the lexicographically larger exponent vector comes first (so for
/// vars (x,y): 1, x, y, x^2, x*y, y^2).
bool grlex_less(const Monomial& a, const Monomial& b);

struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const { return grlex_less(a, b); }
};

/// Sparse multivariate polynomial with double coefficients over a fixed
/// VarSet. Terms map monomials to nonzero coefficients in graded-lex order.
/// Values are immutable in spirit: all operations return new polynomials.
class Polynomial {
public:
    using TermMap = std::map<Monomial, double, GrlexLess>;

    explicit Polynomial(VarSetPtr vars);  // zero polynomial

    static Polynomial zero(VarSetPtr vars) { return Polynomial(std::move(vars)); }
    static Polynomial constant(VarSetPtr vars, double c);
    static Polynomial variable(VarSetPtr vars, std::size_t index);
    static Polynomial variable(VarSetPtr vars, std::string_view name);
    static Polynomial term(VarSetPtr vars, Monomial m, double c);

    const VarSetPtr& varset() const { return vars_; }
    const TermMap& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    /// Max total degree of stored terms; nullopt for the zero polynomial.
    std::optional<int> degree() const;
    double coefficient(const Monomial& m) const;
    std::size_t term_count() const { return terms_.size(); }
    double max_abs_coefficient() const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(double s);
    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial operator-(const Polynomial& rhs) const;
    Polynomial operator*(const Polynomial& rhs) const;
    Polynomial operator*(double s) const;
    Polynomial operator-() const;
    friend Polynomial operator*(double s, const Polynomial& p) { return p * s; }

    bool operator==(const Polynomial& rhs) const;

    Polynomial pow(unsigned k) const;

    Polynomial derivative(std::size_t var) const;
    Polynomial derivative(std::string_view var) const;

    /// Simultaneous substitution; unbound variables pass through. Every
    /// binding target must live over this polynomial's VarSet.
    Polynomial substitute(const std::map<std::size_t, Polynomial>& bindings) const;
    Polynomial substitute(const std::map<std::string, Polynomial>& bindings) const;
    Polynomial substitute_values(const std::map<std::string, double>& bindings) const;

    /// Numeric value with every variable bound by index order.
    double eval(std::span<const double> point) const;
    double eval(const std::map<std::string, double>& point) const;

    /// Copy with coefficients of magnitude <= eps removed.
    Polynomial pruned(double eps) const;

    /// Re-express over another VarSet, matching variables by name. Every
    /// variable actually used must exist in the target set.
    Polynomial embedded(VarSetPtr target) const;

    /// Re-express with an explicit index map (index_map[i] = target slot of
    /// this polynomial's variable i; negative = variable must be unused).
    Polynomial remapped(VarSetPtr target, const std::vector<int>& index_map) const;

    std::string to_string() const;

private:
    void insert_term(const Monomial& m, double c);

    VarSetPtr vars_;
    TermMap terms_;
};

/// All monomials of total degree <= d, graded-lex ascending.
/// Count is C(nvars + d, d).
std::vector<Monomial> monomials_upto(const VarSet& vars, int d);

/// Monomials with total degree in [lo, hi]; if mask is non-null, only the
/// variables with mask[i] == true may appear.
std::vector<Monomial> monomials_in_degrees(const VarSet& vars, int lo, int hi,
                                           const std::vector<bool>* mask = nullptr);

std::string to_string(const Monomial& m, const VarSet& vars);

/// Shortest decimal string that round-trips to exactly v.
std::string shortest_repr(double v);

}  // namespace sampcert
