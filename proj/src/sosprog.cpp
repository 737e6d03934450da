#include "sampcert/sosprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sampcert {

namespace {

constexpr double kAssemblyPrune = 1e-14;
constexpr double kEmptyRowRhs = 1e-12;

int even_ceil(int d) { return d <= 0 ? 0 : d + (d % 2); }

}  // namespace

// ---- LinearPoly -----------------------------------------------------------

LinearPoly::LinearPoly(VarSetPtr vars) : vars_(std::move(vars)) {
    if (!vars_) throw std::invalid_argument("null VarSet");
}

LinearPoly LinearPoly::from_poly(Polynomial p) {
    LinearPoly out(p.varset());
    out.add_part(-1, p);
    return out;
}

LinearPoly LinearPoly::from_unknown(int id, Polynomial coefficient) {
    if (id < 0) throw std::invalid_argument("unknown id must be non-negative");
    LinearPoly out(coefficient.varset());
    out.add_part(id, coefficient);
    return out;
}

void LinearPoly::add_part(int id, const Polynomial& p) {
    if (*p.varset() != *vars_)
        throw std::invalid_argument("mixing variable sets in a linear expression");
    if (p.is_zero()) return;
    auto [it, fresh] = parts_.emplace(id, p);
    if (!fresh) {
        it->second += p;
        if (it->second.is_zero()) parts_.erase(it);
    }
}

std::optional<int> LinearPoly::degree() const {
    std::optional<int> d;
    for (const auto& [id, p] : parts_)
        if (auto pd = p.degree()) d = d ? std::max(*d, *pd) : *pd;
    return d;
}

LinearPoly& LinearPoly::operator+=(const LinearPoly& rhs) {
    if (*vars_ != *rhs.vars_)
        throw std::invalid_argument("mixing variable sets in a linear expression");
    for (const auto& [id, p] : rhs.parts_) add_part(id, p);
    return *this;
}

LinearPoly& LinearPoly::operator-=(const LinearPoly& rhs) {
    if (*vars_ != *rhs.vars_)
        throw std::invalid_argument("mixing variable sets in a linear expression");
    for (const auto& [id, p] : rhs.parts_) add_part(id, -p);
    return *this;
}

LinearPoly LinearPoly::operator+(const LinearPoly& rhs) const {
    LinearPoly out = *this;
    out += rhs;
    return out;
}

LinearPoly LinearPoly::operator-(const LinearPoly& rhs) const {
    LinearPoly out = *this;
    out -= rhs;
    return out;
}

LinearPoly LinearPoly::operator-() const { return *this * -1.0; }

LinearPoly LinearPoly::operator*(double s) const {
    LinearPoly out(vars_);
    if (s == 0.0) return out;
    for (const auto& [id, p] : parts_) out.parts_.emplace(id, p * s);
    return out;
}

LinearPoly LinearPoly::times(const Polynomial& p) const {
    LinearPoly out(vars_);
    if (p.is_zero()) return out;
    for (const auto& [id, q] : parts_) {
        Polynomial prod = q * p;
        if (!prod.is_zero()) out.parts_.emplace(id, std::move(prod));
    }
    return out;
}

LinearPoly LinearPoly::derivative(std::string_view var) const {
    LinearPoly out(vars_);
    for (const auto& [id, p] : parts_) out.add_part(id, p.derivative(var));
    return out;
}

LinearPoly LinearPoly::substitute(const std::map<std::string, Polynomial>& bindings) const {
    LinearPoly out(vars_);
    for (const auto& [id, p] : parts_) out.add_part(id, p.substitute(bindings));
    return out;
}

LinearPoly LinearPoly::substitute_values(const std::map<std::string, double>& bindings) const {
    LinearPoly out(vars_);
    for (const auto& [id, p] : parts_) out.add_part(id, p.substitute_values(bindings));
    return out;
}

LinearPoly LinearPoly::embedded(VarSetPtr target) const {
    LinearPoly out(target);
    for (const auto& [id, p] : parts_) out.add_part(id, p.embedded(target));
    return out;
}

Polynomial LinearPoly::instantiate(const std::vector<double>& unknown_values) const {
    Polynomial out(vars_);
    for (const auto& [id, p] : parts_) {
        if (id < 0) {
            out += p;
            continue;
        }
        if (static_cast<std::size_t>(id) >= unknown_values.size())
            throw std::invalid_argument("unknown id outside the provided value table");
        out += p * unknown_values[static_cast<std::size_t>(id)];
    }
    return out;
}

// ---- DecisionPoly / SosPoly -------------------------------------------------

LinearPoly DecisionPoly::expr() const {
    LinearPoly out(vars);
    for (std::size_t k = 0; k < basis.size(); ++k)
        out += LinearPoly::from_unknown(ids[k], Polynomial::term(vars, basis[k], 1.0));
    return out;
}

Polynomial DecisionPoly::value(const std::vector<double>& unknown_values) const {
    return expr().instantiate(unknown_values);
}

int SosPoly::id_at(int i, int j) const {
    if (i > j || i < 0 || j >= dim()) throw std::invalid_argument("bad Gram index");
    const int n = dim();
    return gram_ids[static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i))];
}

LinearPoly SosPoly::expr() const {
    LinearPoly out(vars);
    const int n = dim();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Monomial prod =
                half_basis[static_cast<std::size_t>(i)].times(half_basis[static_cast<std::size_t>(j)]);
            const double w = i == j ? 1.0 : 2.0;
            out += LinearPoly::from_unknown(id_at(i, j), Polynomial::term(vars, prod, w));
        }
    return out;
}

LinearPoly SosPoly::trace() const {
    LinearPoly out(vars);
    for (int i = 0; i < dim(); ++i)
        out += LinearPoly::from_unknown(id_at(i, i), Polynomial::constant(vars, 1.0));
    return out;
}

Eigen::MatrixXd SosPoly::gram(const std::vector<double>& unknown_values) const {
    const int n = dim();
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const int id = id_at(i, j);
            if (static_cast<std::size_t>(id) >= unknown_values.size())
                throw std::invalid_argument("unknown id outside the provided value table");
            G(i, j) = G(j, i) = unknown_values[static_cast<std::size_t>(id)];
        }
    return G;
}

Polynomial gram_to_poly(VarSetPtr vars, const std::vector<Monomial>& half_basis,
                        const Eigen::MatrixXd& G) {
    const int n = static_cast<int>(half_basis.size());
    if (G.rows() != n || G.cols() != n)
        throw std::invalid_argument("Gram size does not match basis");
    Polynomial out(std::move(vars));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (G(i, j) == 0.0) continue;
            out += Polynomial::term(out.varset(),
                                    half_basis[static_cast<std::size_t>(i)].times(
                                        half_basis[static_cast<std::size_t>(j)]),
                                    G(i, j));
        }
    return out;
}

// ---- SosProgram -------------------------------------------------------------

DecisionPoly SosProgram::new_decision_poly(VarSetPtr vars, int degree) {
    if (degree < 0) throw std::invalid_argument("decision polynomial degree must be >= 0");
    return new_decision_poly(vars, monomials_upto(*vars, degree));
}

DecisionPoly SosProgram::new_decision_poly(VarSetPtr vars, std::vector<Monomial> basis) {
    if (basis.empty()) throw std::invalid_argument("decision polynomial needs a basis");
    DecisionPoly d;
    d.vars = std::move(vars);
    d.basis = std::move(basis);
    for (std::size_t k = 0; k < d.basis.size(); ++k) {
        if (d.basis[k].nvars() != d.vars->size())
            throw std::invalid_argument("basis monomial over wrong variable count");
        int id = fresh_id();
        d.ids.push_back(id);
        decision_ids_.push_back(id);
    }
    return d;
}

SosPoly SosProgram::new_sos_poly(VarSetPtr vars, int degree) {
    if (degree < 0) throw std::invalid_argument("SOS degree must be >= 0");
    if (degree % 2 != 0)
        throw std::invalid_argument("an SOS polynomial must have even degree, got " +
                                    std::to_string(degree));
    return new_sos_poly(vars, monomials_upto(*vars, degree / 2));
}

SosPoly SosProgram::new_sos_poly(VarSetPtr vars, std::vector<Monomial> half_basis) {
    if (half_basis.empty()) throw std::invalid_argument("SOS polynomial needs a basis");
    SosPoly s;
    s.vars = std::move(vars);
    s.half_basis = std::move(half_basis);
    for (const auto& m : s.half_basis)
        if (m.nvars() != s.vars->size())
            throw std::invalid_argument("basis monomial over wrong variable count");
    const int n = s.dim();
    s.sos_index = static_cast<int>(sos_polys_.size());
    s.gram_ids.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) s.gram_ids.push_back(fresh_id());
    sos_polys_.push_back(s);
    return s;
}

void SosProgram::assert_poly_eq(const LinearPoly& lhs, const LinearPoly& rhs) {
    LinearPoly diff = lhs - rhs;
    // Scatter every part's terms into one row per monomial; graded-lex keyed,
    // so row order is deterministic.
    std::map<Monomial, Row, GrlexLess> by_monomial;
    for (const auto& [id, p] : diff.parts())
        for (const auto& [m, c] : p.terms()) {
            if (std::abs(c) <= kAssemblyPrune) continue;
            Row& row = by_monomial[m];
            if (id < 0)
                row.rhs -= c;
            else
                row.coeff[id] = c;
        }

    for (auto& [m, row] : by_monomial) {
        if (row.coeff.empty()) {
            if (std::abs(row.rhs) > kEmptyRowRhs)
                throw std::invalid_argument(
                    "no unknowns can match monomial " + to_string(m, *diff.varset()) +
                    " (required coefficient " + std::to_string(row.rhs) + ")");
            continue;  // identically satisfied
        }
        row.label = to_string(m, *diff.varset());
        rows_.push_back(std::move(row));
    }
}

SosProgram::PsatzHandles SosProgram::psatz_combine(const LinearPoly& target,
                                                   const std::vector<Polynomial>& localizers,
                                                   const std::vector<int>* degrees) {
    if (degrees && degrees->size() != localizers.size() + 1)
        throw std::invalid_argument("need one degree for s0 plus one per localizer");
    const int dt = target.degree().value_or(0);

    PsatzHandles out;
    const int d0 = degrees ? (*degrees)[0] : even_ceil(dt);
    out.s0 = new_sos_poly(target.varset(), d0);
    LinearPoly combo = out.s0.expr();
    for (std::size_t i = 0; i < localizers.size(); ++i) {
        const Polynomial& g = localizers[i];
        if (*g.varset() != *target.varset())
            throw std::invalid_argument("localizer over a different variable set");
        if (g.is_zero()) throw std::invalid_argument("zero localizer");
        const int di =
            degrees ? (*degrees)[i + 1] : even_ceil(dt - g.degree().value_or(0));
        SosPoly si = new_sos_poly(target.varset(), di);
        combo += si.expr().times(g);
        out.s.push_back(std::move(si));
    }
    assert_poly_eq(target, combo);
    return out;
}

CompiledProgram SosProgram::compile() const {
    if (rows_.empty()) throw std::invalid_argument("program has no constraints");

    // Facial reduction: a zero-rhs row whose only unknown is a single Gram
    // diagonal forces that diagonal to zero, and by positive semidefiniteness
    // the diagonal's whole row and column with it. Removing those basis
    // elements up front both shrinks the blocks and restores the strictly
    // feasible interior the interior-point solver needs; without it every
    // feasible point sits on the cone boundary and the dual iterates diverge.
    std::vector<char> pinned(static_cast<std::size_t>(next_id_), 0);
    std::vector<int> gram_sos(static_cast<std::size_t>(next_id_), -1);
    std::vector<std::pair<int, int>> gram_pos(static_cast<std::size_t>(next_id_), {0, 0});
    for (const auto& s : sos_polys_)
        for (int i = 0; i < s.dim(); ++i)
            for (int j = i; j < s.dim(); ++j) {
                const auto id = static_cast<std::size_t>(s.id_at(i, j));
                gram_sos[id] = s.sos_index;
                gram_pos[id] = {i, j};
            }
    for (bool changed = true; changed;) {
        changed = false;
        for (const Row& row : rows_) {
            if (std::abs(row.rhs) > 1e-14) continue;
            int live = 0, lone = -1;
            for (const auto& [id, c] : row.coeff) {
                if (pinned[static_cast<std::size_t>(id)]) continue;
                if (++live > 1) break;
                lone = id;
            }
            if (live != 1 || gram_sos[static_cast<std::size_t>(lone)] < 0) continue;
            const auto [i, j] = gram_pos[static_cast<std::size_t>(lone)];
            if (i != j) continue;
            const SosPoly& s = sos_polys_[static_cast<std::size_t>(
                gram_sos[static_cast<std::size_t>(lone)])];
            for (int k = 0; k < s.dim(); ++k) {
                auto& flag =
                    pinned[static_cast<std::size_t>(s.id_at(std::min(i, k), std::max(i, k)))];
                if (!flag) {
                    flag = 1;
                    changed = true;
                }
            }
        }
    }

    CompiledProgram out;
    out.locs.assign(static_cast<std::size_t>(next_id_), CompiledProgram::Loc{-1, -1, 0, 0});

    int next_block = 0;
    if (!decision_ids_.empty()) {
        out.free_block = next_block++;
        out.problem.blocks.push_back({BlockKind::Free, static_cast<int>(decision_ids_.size())});
        for (std::size_t k = 0; k < decision_ids_.size(); ++k)
            out.locs[static_cast<std::size_t>(decision_ids_[k])] = {0, out.free_block,
                                                                    static_cast<int>(k),
                                                                    static_cast<int>(k)};
    }
    std::vector<std::vector<int>> kept(sos_polys_.size());
    for (const auto& s : sos_polys_) {
        auto& keep = kept[static_cast<std::size_t>(s.sos_index)];
        for (int i = 0; i < s.dim(); ++i)
            if (!pinned[static_cast<std::size_t>(s.id_at(i, i))]) keep.push_back(i);
        if (keep.empty()) {
            out.psd_block.push_back(-1);  // SOS poly forced identically zero
            continue;
        }
        const int blk = next_block++;
        out.psd_block.push_back(blk);
        out.problem.blocks.push_back({BlockKind::Psd, static_cast<int>(keep.size())});
        for (std::size_t a = 0; a < keep.size(); ++a)
            for (std::size_t b = a; b < keep.size(); ++b)
                out.locs[static_cast<std::size_t>(s.id_at(keep[a], keep[b]))] = {
                    1, blk, static_cast<int>(a), static_cast<int>(b)};
    }

    int emitted = 0;
    for (const Row& row : rows_) {
        bool any = false;
        for (const auto& [id, c] : row.coeff) {
            const auto& loc = out.locs[static_cast<std::size_t>(id)];
            if (loc.block < 0) continue;  // pinned to zero
            // Off-diagonal Gram entries pair up in <A,X>: halve the weight.
            const double v = (loc.kind == 1 && loc.r != loc.c) ? 0.5 * c : c;
            out.problem.A.push_back({emitted, loc.block, loc.r, loc.c, v});
            any = true;
        }
        if (!any && std::abs(row.rhs) <= 1e-14) continue;  // 0 == 0 after pinning
        ++emitted;
        out.problem.rhs.push_back(row.rhs);
        out.problem.row_labels.push_back(row.label);
    }

    if (trace_weight_ != 0.0)
        for (const auto& s : sos_polys_) {
            const int blk = out.psd_block[static_cast<std::size_t>(s.sos_index)];
            out.trace_weight.push_back(trace_weight_);
            if (blk < 0) continue;
            const auto dim =
                static_cast<int>(kept[static_cast<std::size_t>(s.sos_index)].size());
            for (int i = 0; i < dim; ++i)
                out.problem.objective.push_back({blk, i, i, trace_weight_});
        }

    out.problem.validate();
    return out;
}

std::vector<double> CompiledProgram::extract(const ConicSolution& solution) const {
    std::vector<double> values(locs.size(), 0.0);
    for (std::size_t id = 0; id < locs.size(); ++id) {
        const Loc& loc = locs[id];
        if (loc.block < 0) continue;  // unknown never placed (unreferenced)
        const Eigen::MatrixXd& blk = solution.X[static_cast<std::size_t>(loc.block)];
        values[id] = loc.kind == 0 ? blk(loc.r, 0) : blk(loc.r, loc.c);
    }
    return values;
}

}  // namespace sampcert
