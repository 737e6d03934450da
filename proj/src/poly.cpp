#include "sampcert/poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sampcert {

std::string shortest_repr(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

VarSet::VarSet(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw std::invalid_argument("empty variable name");
        auto [it, fresh] = index_.emplace(names_[i], i);
        if (!fresh) throw std::invalid_argument("duplicate variable name: " + names_[i]);
    }
}

std::shared_ptr<const VarSet> VarSet::create(std::vector<std::string> names) {
    return std::make_shared<const VarSet>(std::move(names));
}

std::optional<std::size_t> VarSet::index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t VarSet::require(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw std::invalid_argument("unknown variable: " + std::string(name));
    return *idx;
}

std::string VarSet::joined() const {
    std::string out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (i) out += ',';
        out += names_[i];
    }
    return out;
}

Monomial::Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
        if (e < 0) throw std::invalid_argument("negative exponent in monomial");
        degree_ += e;
    }
}

Monomial Monomial::one(std::size_t nvars) {
    return Monomial(std::vector<int>(nvars, 0));
}

Monomial Monomial::times(const Monomial& other) const {
    if (exps_.size() != other.exps_.size())
        throw std::invalid_argument("monomial variable-count mismatch");
    std::vector<int> e(exps_.size());
    for (std::size_t i = 0; i < exps_.size(); ++i) e[i] = exps_[i] + other.exps_[i];
    return Monomial(std::move(e));
}

bool grlex_less(const Monomial& a, const Monomial& b) {
    if (a.nvars() != b.nvars())
        throw std::invalid_argument("comparing monomials over different variable counts");
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    // Within a degree block the lexicographically larger exponent vector
    // sorts first: (2,0) before (1,1) before (0,2).
    return a.exponents() > b.exponents();
}

Polynomial::Polynomial(VarSetPtr vars) : vars_(std::move(vars)) {
    if (!vars_) throw std::invalid_argument("null VarSet");
}

Polynomial Polynomial::constant(VarSetPtr vars, double c) {
    Polynomial p(std::move(vars));
    p.insert_term(Monomial::one(p.vars_->size()), c);
    return p;
}

Polynomial Polynomial::variable(VarSetPtr vars, std::size_t index) {
    Polynomial p(std::move(vars));
    if (index >= p.vars_->size()) throw std::invalid_argument("variable index out of range");
    std::vector<int> e(p.vars_->size(), 0);
    e[index] = 1;
    p.insert_term(Monomial(std::move(e)), 1.0);
    return p;
}

Polynomial Polynomial::variable(VarSetPtr vars, std::string_view name) {
    std::size_t idx = vars->require(name);
    return variable(std::move(vars), idx);
}

Polynomial Polynomial::term(VarSetPtr vars, Monomial m, double c) {
    Polynomial p(std::move(vars));
    if (m.nvars() != p.vars_->size())
        throw std::invalid_argument("monomial size does not match VarSet");
    p.insert_term(m, c);
    return p;
}

std::optional<int> Polynomial::degree() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

void Polynomial::insert_term(const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (*vars_ != *rhs.vars_)
        throw std::invalid_argument("adding polynomials over different variable sets");
    for (const auto& [m, c] : rhs.terms_) insert_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (*vars_ != *rhs.vars_)
        throw std::invalid_argument("subtracting polynomials over different variable sets");
    for (const auto& [m, c] : rhs.terms_) insert_term(m, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    Polynomial out = *this;
    out += rhs;
    return out;
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
    Polynomial out = *this;
    out -= rhs;
    return out;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    if (*vars_ != *rhs.vars_)
        throw std::invalid_argument("multiplying polynomials over different variable sets");
    Polynomial out(vars_);
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : rhs.terms_) out.insert_term(ma.times(mb), ca * cb);
    return out;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial out = *this;
    out *= s;
    return out;
}

Polynomial Polynomial::operator-() const {
    return *this * -1.0;
}

bool Polynomial::operator==(const Polynomial& rhs) const {
    return *vars_ == *rhs.vars_ && terms_ == rhs.terms_;
}

Polynomial Polynomial::pow(unsigned k) const {
    Polynomial out = Polynomial::constant(vars_, 1.0);
    for (unsigned i = 0; i < k; ++i) out = out * *this;
    return out;
}

Polynomial Polynomial::derivative(std::size_t var) const {
    if (var >= vars_->size()) throw std::invalid_argument("variable index out of range");
    Polynomial out(vars_);
    for (const auto& [m, c] : terms_) {
        int e = m.exponent(var);
        if (e == 0) continue;
        std::vector<int> exps = m.exponents();
        exps[var] = e - 1;
        out.insert_term(Monomial(std::move(exps)), c * e);
    }
    return out;
}

Polynomial Polynomial::derivative(std::string_view var) const {
    return derivative(vars_->require(var));
}

Polynomial Polynomial::substitute(const std::map<std::size_t, Polynomial>& bindings) const {
    for (const auto& [idx, p] : bindings) {
        if (idx >= vars_->size()) throw std::invalid_argument("binding index out of range");
        if (*p.varset() != *vars_)
            throw std::invalid_argument("substitution image over a different variable set");
    }
    Polynomial out(vars_);
    for (const auto& [m, c] : terms_) {
        // Split the monomial into its unbound part and powers of bound vars.
        std::vector<int> rest = m.exponents();
        Polynomial piece(vars_);
        bool started = false;
        for (const auto& [idx, image] : bindings) {
            int e = rest[idx];
            if (e == 0) continue;
            rest[idx] = 0;
            Polynomial factor = image.pow(static_cast<unsigned>(e));
            piece = started ? piece * factor : std::move(factor);
            started = true;
        }
        Polynomial base = Polynomial::term(vars_, Monomial(std::move(rest)), c);
        out += started ? base * piece : base;
    }
    return out;
}

Polynomial Polynomial::substitute(const std::map<std::string, Polynomial>& bindings) const {
    std::map<std::size_t, Polynomial> by_index;
    for (const auto& [name, p] : bindings) by_index.emplace(vars_->require(name), p);
    return substitute(by_index);
}

Polynomial Polynomial::substitute_values(const std::map<std::string, double>& bindings) const {
    std::map<std::size_t, Polynomial> by_index;
    for (const auto& [name, v] : bindings)
        by_index.emplace(vars_->require(name), Polynomial::constant(vars_, v));
    return substitute(by_index);
}

double Polynomial::eval(std::span<const double> point) const {
    if (point.size() != vars_->size())
        throw std::invalid_argument("evaluation point has wrong dimension");
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
        double v = c;
        for (std::size_t i = 0; i < point.size(); ++i) {
            int e = m.exponent(i);
            for (int k = 0; k < e; ++k) v *= point[i];
        }
        total += v;
    }
    return total;
}

double Polynomial::eval(const std::map<std::string, double>& point) const {
    std::vector<double> x(vars_->size());
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        auto it = point.find(vars_->name(i));
        if (it == point.end())
            throw std::invalid_argument("evaluation point missing variable: " + vars_->name(i));
        x[i] = it->second;
    }
    return eval(x);
}

Polynomial Polynomial::pruned(double eps) const {
    Polynomial out(vars_);
    for (const auto& [m, c] : terms_)
        if (std::abs(c) > eps) out.terms_.emplace(m, c);
    return out;
}

Polynomial Polynomial::embedded(VarSetPtr target) const {
    std::vector<int> index_map(vars_->size(), -1);
    for (std::size_t i = 0; i < vars_->size(); ++i) {
        auto idx = target->index_of(vars_->name(i));
        if (idx) index_map[i] = static_cast<int>(*idx);
    }
    return remapped(std::move(target), index_map);
}

Polynomial Polynomial::remapped(VarSetPtr target, const std::vector<int>& index_map) const {
    if (index_map.size() != vars_->size())
        throw std::invalid_argument("index map size does not match source variable set");
    Polynomial out(std::move(target));
    const std::size_t tn = out.vars_->size();
    for (const auto& [m, c] : terms_) {
        std::vector<int> e(tn, 0);
        for (std::size_t i = 0; i < vars_->size(); ++i) {
            int p = m.exponent(i);
            if (p == 0) continue;
            if (index_map[i] < 0 || static_cast<std::size_t>(index_map[i]) >= tn)
                throw std::invalid_argument("variable " + vars_->name(i) +
                                            " has no slot in target variable set");
            e[static_cast<std::size_t>(index_map[i])] += p;
        }
        out.insert_term(Monomial(std::move(e)), c);
    }
    return out;
}

std::string to_string(const Monomial& m, const VarSet& vars) {
    if (m.degree() == 0) return "1";
    std::string out;
    for (std::size_t i = 0; i < m.nvars(); ++i) {
        int e = m.exponent(i);
        if (e == 0) continue;
        if (!out.empty()) out += '*';
        out += vars.name(i);
        if (e > 1) {
            out += '^';
            out += std::to_string(e);
        }
    }
    return out;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        double mag = std::abs(c);
        if (first) {
            if (c < 0) out += '-';
        } else {
            out += c < 0 ? " - " : " + ";
        }
        std::string mono = sampcert::to_string(m, *vars_);
        if (mono == "1") {
            out += shortest_repr(mag);
        } else {
            if (mag != 1.0) {
                out += shortest_repr(mag);
                out += '*';
            }
            out += mono;
        }
        first = false;
    }
    return out;
}

namespace {

// Emits exponent vectors of total degree exactly d over positions [pos, n) in
// lexicographically descending order, which is grlex order within the block.
void emit_fixed_degree(std::vector<int>& e, std::size_t pos, int d,
                       const std::vector<bool>* mask, std::vector<Monomial>& out) {
    const std::size_t n = e.size();
    if (pos == n) {
        if (d == 0) out.emplace_back(e);
        return;
    }
    if (pos + 1 == n) {
        if (mask && !(*mask)[pos] && d > 0) return;
        e[pos] = d;
        out.emplace_back(e);
        e[pos] = 0;
        return;
    }
    int hi = (mask && !(*mask)[pos]) ? 0 : d;
    for (int k = hi; k >= 0; --k) {
        e[pos] = k;
        emit_fixed_degree(e, pos + 1, d - k, mask, out);
    }
    e[pos] = 0;
}

}  // namespace

std::vector<Monomial> monomials_in_degrees(const VarSet& vars, int lo, int hi,
                                           const std::vector<bool>* mask) {
    if (lo < 0 || hi < lo) throw std::invalid_argument("bad degree range");
    if (mask && mask->size() != vars.size())
        throw std::invalid_argument("mask size does not match variable set");
    std::vector<Monomial> out;
    std::vector<int> e(vars.size(), 0);
    for (int d = lo; d <= hi; ++d) emit_fixed_degree(e, 0, d, mask, out);
    return out;
}

std::vector<Monomial> monomials_upto(const VarSet& vars, int d) {
    return monomials_in_degrees(vars, 0, d, nullptr);
}

}  // namespace sampcert
