#include "rlcnet/bondgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"

namespace rlcnet {

std::string_view keyword(ElementKind kind)
{
    switch (kind) {
    case ElementKind::Se: return "se";
    case ElementKind::R: return "r";
    case ElementKind::C: return "c";
    case ElementKind::L: return "l";
    case ElementKind::Junction0: return "j0";
    case ElementKind::Junction1: return "j1";
    }
    return "?";
}

int BondGraphSpec::find(std::string_view name) const
{
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (elements[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

void BondGraphSpec::validate() const
{
    std::set<std::string> names;
    int sources = 0;
    for (const auto& e : elements) {
        if (!names.insert(e.name).second) {
            throw ParseError("duplicate element name '" + e.name + "'");
        }
        if (e.kind == ElementKind::Se) ++sources;
    }
    if (sources != 1) {
        throw ParseError(sources == 0 ? "netlist has no source (se)" : "netlist has more than one source");
    }

    std::vector<int> degree(elements.size(), 0);
    for (const auto& b : bonds) {
        const int from = find(b.from), to = find(b.to);
        if (from < 0 || to < 0) {
            throw ParseError("bond " + b.from + " -> " + b.to + " names undeclared element '" +
                             (from < 0 ? b.from : b.to) + "'");
        }
        if (from == to) {
            throw ParseError("bond connects '" + b.from + "' to itself");
        }
        ++degree[from];
        ++degree[to];
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto& e = elements[i];
        if (e.is_junction()) {
            if (degree[i] < 2) {
                throw ParseError("junction '" + e.name + "' needs at least two bonds");
            }
        } else if (degree[i] != 1) {
            throw ParseError("element '" + e.name + "' has " + std::to_string(degree[i]) +
                             " bonds; one-port elements need exactly one");
        }
    }

    if (output.empty()) {
        throw ParseError("netlist has no output statement");
    }
    const int out = find(output);
    if (out < 0) {
        throw ParseError("output names undeclared element '" + output + "'");
    }
    const auto kind = elements[out].kind;
    if (kind != ElementKind::R && kind != ElementKind::L && kind != ElementKind::C) {
        throw ParseError("output '" + output + "' must be an r, l or c element");
    }
}

namespace {

std::vector<std::string> tokenize(std::string_view line)
{
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

double parse_positive(const std::string& token, int line)
{
    double value = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
        throw ParseError("expected a number, got '" + token + "'", line);
    }
    if (!std::isfinite(value) || value <= 0.0) {
        throw ParseError("element values must be finite and > 0, got '" + token + "'", line);
    }
    return value;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

BondGraphSpec parse_netlist(std::string_view text)
{
    BondGraphSpec spec;
    std::map<std::string, int> declared_at;
    int line_no = 0;
    bool any_statement = false;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        any_statement = true;

        const std::string kw = lower(tokens[0]);
        auto expect = [&](std::size_t n) {
            if (tokens.size() != n) {
                throw ParseError("'" + kw + "' takes " + std::to_string(n - 1) + " argument(s), got " +
                                     std::to_string(tokens.size() - 1),
                                 line_no);
            }
        };
        auto declare = [&](Element e) {
            if (auto it = declared_at.find(e.name); it != declared_at.end()) {
                throw ParseError("duplicate element name '" + e.name + "' (first declared on line " +
                                     std::to_string(it->second) + ")",
                                 line_no);
            }
            declared_at.emplace(e.name, line_no);
            spec.elements.push_back(std::move(e));
        };

        if (kw == "se") {
            expect(4);
            declare({ElementKind::Se, tokens[1], parse_positive(tokens[2], line_no),
                     parse_positive(tokens[3], line_no)});
        } else if (kw == "r" || kw == "l" || kw == "c") {
            expect(3);
            const auto kind = kw == "r" ? ElementKind::R : kw == "l" ? ElementKind::L : ElementKind::C;
            declare({kind, tokens[1], parse_positive(tokens[2], line_no), 0.0});
        } else if (kw == "j0" || kw == "j1") {
            expect(2);
            declare({kw == "j0" ? ElementKind::Junction0 : ElementKind::Junction1, tokens[1], 0.0, 0.0});
        } else if (kw == "bond") {
            expect(3);
            spec.bonds.push_back({tokens[1], tokens[2]});
        } else if (kw == "output") {
            expect(2);
            if (!spec.output.empty()) {
                throw ParseError("more than one output statement", line_no);
            }
            spec.output = tokens[1];
        } else {
            throw ParseError("unknown statement '" + tokens[0] + "'", line_no);
        }
    }
    if (!any_statement) {
        throw ParseError("netlist is empty");
    }
    spec.validate();
    return spec;
}

std::string serialize_netlist(const BondGraphSpec& spec)
{
    std::ostringstream out;
    for (const auto& e : spec.elements) {
        out << keyword(e.kind) << ' ' << e.name;
        if (e.kind == ElementKind::Se) {
            out << ' ' << format_double(e.value) << ' ' << format_double(e.frequency);
        } else if (!e.is_junction()) {
            out << ' ' << format_double(e.value);
        }
        out << '\n';
    }
    for (const auto& b : spec.bonds) out << "bond " << b.from << ' ' << b.to << '\n';
    if (!spec.output.empty()) out << "output " << spec.output << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Causality
// ---------------------------------------------------------------------------

namespace {

class CausalityAssigner {
public:
    explicit CausalityAssigner(const BondGraphSpec& spec) : spec_(spec), setter_(spec.bonds.size(), -1)
    {
        endpoints_.resize(spec.bonds.size());
        incident_.resize(spec.elements.size());
        for (std::size_t b = 0; b < spec.bonds.size(); ++b) {
            const int from = spec.find(spec.bonds[b].from), to = spec.find(spec.bonds[b].to);
            endpoints_[b] = {from, to};
            incident_[from].push_back(static_cast<int>(b));
            incident_[to].push_back(static_cast<int>(b));
        }
    }

    CausalBondGraph run()
    {
        for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
            if (spec_.elements[i].kind == ElementKind::Se) impose(port_bond(i), static_cast<int>(i));
        }
        for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
            const auto kind = spec_.elements[i].kind;
            if (kind != ElementKind::C && kind != ElementKind::L) continue;
            const int b = port_bond(i);
            const int integral = integral_setter(static_cast<int>(i), b);
            if (setter_[b] >= 0 && setter_[b] != integral) {
                throw CausalityError("storage element '" + spec_.elements[i].name +
                                     "' is forced into derivative causality (dependent storage)");
            }
            impose(b, integral);
        }
        for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
            if (spec_.elements[i].kind != ElementKind::R) continue;
            const int b = port_bond(i);
            if (setter_[b] < 0) impose(b, other_end(b, static_cast<int>(i)));
        }
        for (std::size_t b = 0; b < setter_.size(); ++b) {
            if (setter_[b] < 0) impose(static_cast<int>(b), endpoints_[b].first);
        }
        check_final();

        CausalBondGraph out{spec_, setter_, {}};
        for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
            const auto kind = spec_.elements[i].kind;
            if (kind == ElementKind::C || kind == ElementKind::L) out.states.push_back(static_cast<int>(i));
        }
        return out;
    }

private:
    int port_bond(std::size_t element) const { return incident_[element].front(); }

    int other_end(int bond, int element) const
    {
        const auto [a, b] = endpoints_[bond];
        return a == element ? b : a;
    }

    // A capacitor integrates flow into effort; an inductor integrates effort
    // into flow, so the neighbour must set the effort.
    int integral_setter(int element, int bond) const
    {
        return spec_.elements[element].kind == ElementKind::C ? element : other_end(bond, element);
    }

    void impose(int bond, int setter)
    {
        if (setter_[bond] >= 0) {
            if (setter_[bond] != setter) conflict(bond);
            return;
        }
        setter_[bond] = setter;
        const auto [a, b] = endpoints_[bond];
        for (int element : {a, b}) {
            const auto& e = spec_.elements[element];
            if (e.kind == ElementKind::Se && setter_[bond] != element) {
                throw CausalityError("source '" + e.name + "' cannot impose its effort");
            }
            if (e.is_junction()) propagate(element);
        }
    }

    // Number of bonds where the junction itself sets the effort.
    void propagate(int junction)
    {
        const bool zero = spec_.elements[junction].kind == ElementKind::Junction0;
        int decided_inward = 0;  // 0-junction: neighbour sets effort; 1-junction: junction sets effort
        int unassigned = -1, unassigned_count = 0;
        for (int b : incident_[junction]) {
            if (setter_[b] < 0) {
                unassigned = b;
                ++unassigned_count;
                continue;
            }
            const bool junction_sets = setter_[b] == junction;
            if (zero ? !junction_sets : junction_sets) ++decided_inward;
        }
        if (decided_inward > 1) {
            throw CausalityError(std::string(zero ? "0" : "1") + "-junction '" + spec_.elements[junction].name +
                                 "' has more than one " + (zero ? "effort" : "flow") +
                                 "-deciding bond (causal conflict)");
        }
        if (decided_inward == 1) {
            for (int b : incident_[junction]) {
                if (setter_[b] < 0) impose(b, zero ? junction : other_end(b, junction));
            }
        } else if (unassigned_count == 1) {
            impose(unassigned, zero ? other_end(unassigned, junction) : junction);
        }
    }

    void check_final() const
    {
        for (std::size_t j = 0; j < spec_.elements.size(); ++j) {
            if (!spec_.elements[j].is_junction()) continue;
            const bool zero = spec_.elements[j].kind == ElementKind::Junction0;
            int deciding = 0;
            for (int b : incident_[j]) {
                const bool junction_sets = setter_[b] == static_cast<int>(j);
                if (zero ? !junction_sets : junction_sets) ++deciding;
            }
            if (deciding != 1) {
                throw CausalityError("junction '" + spec_.elements[j].name + "' has " + std::to_string(deciding) +
                                     " deciding bonds after assignment (causal conflict)");
            }
        }
    }

    [[noreturn]] void conflict(int bond) const
    {
        throw CausalityError("causal conflict on bond " + spec_.bonds[bond].from + " -> " + spec_.bonds[bond].to);
    }

    const BondGraphSpec& spec_;
    std::vector<int> setter_;
    std::vector<std::pair<int, int>> endpoints_;
    std::vector<std::vector<int>> incident_;
};

}  // namespace

CausalBondGraph assign_causality(const BondGraphSpec& spec)
{
    spec.validate();
    return CausalityAssigner(spec).run();
}

// ---------------------------------------------------------------------------
// State space
// ---------------------------------------------------------------------------

StateSpace derive_state_space(const CausalBondGraph& graph)
{
    const auto& spec = graph.spec;
    const auto n_bonds = static_cast<int>(spec.bonds.size());
    const auto n_states = static_cast<int>(graph.states.size());
    const int unknowns = 2 * n_bonds;  // e_b at 2b, f_b at 2b + 1

    std::vector<int> state_of(spec.elements.size(), -1);
    for (int s = 0; s < n_states; ++s) state_of[graph.states[s]] = s;

    std::vector<std::vector<int>> incident(spec.elements.size());
    std::vector<std::pair<int, int>> ends(n_bonds);
    for (int b = 0; b < n_bonds; ++b) {
        ends[b] = {spec.find(spec.bonds[b].from), spec.find(spec.bonds[b].to)};
        incident[ends[b].first].push_back(b);
        incident[ends[b].second].push_back(b);
    }
    // +1 when the half-arrow points into the element.
    auto inward = [&](int bond, int element) { return ends[bond].second == element ? 1.0 : -1.0; };

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(unknowns, unknowns);
    Eigen::MatrixXd Sx = Eigen::MatrixXd::Zero(unknowns, n_states);
    Eigen::VectorXd Su = Eigen::VectorXd::Zero(unknowns);
    int row = 0;

    for (std::size_t i = 0; i < spec.elements.size(); ++i) {
        const auto& e = spec.elements[i];
        const int el = static_cast<int>(i);
        if (!e.is_junction()) {
            const int b = incident[i].front();
            const double sgn = inward(b, el);
            switch (e.kind) {
            case ElementKind::Se:
                M(row, 2 * b) = 1.0;
                Su(row) = 1.0;
                break;
            case ElementKind::R:
                M(row, 2 * b) = 1.0;
                M(row, 2 * b + 1) = -e.value * sgn;
                break;
            case ElementKind::C:
                M(row, 2 * b) = 1.0;
                Sx(row, state_of[i]) = 1.0 / e.value;
                break;
            case ElementKind::L:
                M(row, 2 * b + 1) = sgn;
                Sx(row, state_of[i]) = 1.0 / e.value;
                break;
            default: break;
            }
            ++row;
            continue;
        }
        // 0-junction: common effort, flows sum to zero. 1-junction: the dual.
        const int shared = e.kind == ElementKind::Junction0 ? 0 : 1;
        const int summed = 1 - shared;
        const auto& bonds = incident[i];
        for (std::size_t k = 1; k < bonds.size(); ++k) {
            M(row, 2 * bonds[0] + shared) = 1.0;
            M(row, 2 * bonds[k] + shared) = -1.0;
            ++row;
        }
        for (int b : bonds) M(row, 2 * b + summed) = inward(b, el);
        ++row;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) {
        throw CausalityError("junction equations are singular; the graph has dependent storage or an "
                             "unresolved algebraic loop");
    }
    const Eigen::MatrixXd Zx = lu.solve(Sx);
    const Eigen::VectorXd Zu = lu.solve(Su);

    StateSpace ss;
    ss.A.resize(n_states, n_states);
    ss.B.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
        const int el = graph.states[s];
        const int b = incident[el].front();
        const auto& e = spec.elements[el];
        // dq/dt = flow into C; dp/dt = effort across L.
        const int idx = e.kind == ElementKind::C ? 2 * b + 1 : 2 * b;
        const double sgn = e.kind == ElementKind::C ? inward(b, el) : 1.0;
        ss.A.row(s) = sgn * Zx.row(idx);
        ss.B(s) = sgn * Zu(idx);
        ss.state_labels.push_back((e.kind == ElementKind::C ? "q_" : "p_") + e.name);
    }

    const int out = spec.find(spec.output);
    const int out_bond = incident[out].front();
    const double out_sgn = inward(out_bond, out);
    ss.Cvec = out_sgn * Zx.row(2 * out_bond + 1);
    ss.D = out_sgn * Zu(2 * out_bond + 1);
    return ss;
}

FaddeevLeverrier faddeev_leverrier(const Eigen::MatrixXd& A)
{
    const auto n = static_cast<int>(A.rows());
    FaddeevLeverrier out;
    out.char_poly.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.char_poly[n] = 1.0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        Mk = A * Mk + out.char_poly[n - k + 1] * I;
        out.adjugate_terms.push_back(Mk);
        out.char_poly[n - k] = -(A * Mk).trace() / k;
    }
    return out;
}

LinearOde state_space_to_ode(const StateSpace& ss)
{
    const int n = ss.size();
    const auto fl = faddeev_leverrier(ss.A);
    LinearOde ode;
    ode.lhs = fl.char_poly;
    ode.forcing.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        ode.forcing[n - k] = (ss.Cvec * fl.adjugate_terms[k - 1] * ss.B)(0, 0);
    }
    for (int j = 0; j <= n; ++j) ode.forcing[j] += ss.D * fl.char_poly[j];
    // Cancellation in the recursion leaves round-off where the exact
    // coefficient is zero.
    double largest = 0.0;
    for (double g : ode.forcing) largest = std::max(largest, std::abs(g));
    for (double& g : ode.forcing) {
        if (std::abs(g) <= 64.0 * std::numeric_limits<double>::epsilon() * largest) g = 0.0;
    }
    while (ode.forcing.size() > 1 && ode.forcing.back() == 0.0) ode.forcing.pop_back();
    return ode;
}

double projective_mismatch(const LinearOde& derived, const LinearOde& reference)
{
    derived.validate();
    reference.validate();
    if (derived.order() != reference.order()) {
        return std::numeric_limits<double>::infinity();
    }
    const double sd = derived.lhs.back(), sr = reference.lhs.back();
    auto compare = [](std::vector<double> x, std::vector<double> y) {
        const std::size_t len = std::max(x.size(), y.size());
        x.resize(len, 0.0);
        y.resize(len, 0.0);
        double scale = 0.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        double worst = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double denom = y[i] != 0.0 ? std::abs(y[i]) : (scale > 0.0 ? scale : 1.0);
            worst = std::max(worst, std::abs(x[i] - y[i]) / denom);
        }
        return worst;
    };
    auto scaled = [](const std::vector<double>& v, double s) {
        std::vector<double> out(v);
        for (auto& x : out) x /= s;
        return out;
    };
    return std::max(compare(scaled(derived.lhs, sd), scaled(reference.lhs, sr)),
                    compare(scaled(derived.forcing, sd), scaled(reference.forcing, sr)));
}

}  // namespace rlcnet
