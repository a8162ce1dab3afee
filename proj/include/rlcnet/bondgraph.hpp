#pragma once

// Bond-graph description of a single-source linear circuit and its reduction
// to one input-output ODE in the observed current.
//
// Netlist format, one statement per line, '#' starts a comment:
//
//     se <name> <Vmax> <f>
//     r <name> <ohm>     l <name> <henry>     c <name> <farad>
//     j0 <name>          j1 <name>
//     bond <from> <to>   # half-arrow points from -> to
//     output <name>      # element whose current is observed

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rlcnet/circuit.hpp"

namespace rlcnet {

enum class ElementKind { Se, R, C, L, Junction0, Junction1 };

std::string_view keyword(ElementKind kind);

struct Element {
    ElementKind kind = ElementKind::R;
    std::string name;
    double value = 0.0;      // amplitude (Se), ohm, farad or henry
    double frequency = 0.0;  // Se only, hertz

    bool is_junction() const { return kind == ElementKind::Junction0 || kind == ElementKind::Junction1; }
    bool operator==(const Element&) const = default;
};

struct Bond {
    std::string from;
    std::string to;
    bool operator==(const Bond&) const = default;
};

struct BondGraphSpec {
    std::vector<Element> elements;
    std::vector<Bond> bonds;
    std::string output;

    /// Index of the named element, or -1.
    int find(std::string_view name) const;

    /// Structural checks: unique names, declared bond endpoints, exactly one
    /// source, one bond per one-port, an observable output. Throws ParseError.
    void validate() const;

    bool operator==(const BondGraphSpec&) const = default;
};

BondGraphSpec parse_netlist(std::string_view text);
std::string serialize_netlist(const BondGraphSpec& spec);

struct CausalBondGraph {
    BondGraphSpec spec;
    /// Per bond, the element index that imposes the effort on it.
    std::vector<int> effort_setter;
    /// Storage elements in integral causality, in declaration order.
    std::vector<int> states;
};

/// Sequential causality assignment: source first, then every storage element
/// in integral causality, then resistors, propagating junction constraints
/// after each choice. Any storage element forced into derivative causality
/// raises CausalityError.
CausalBondGraph assign_causality(const BondGraphSpec& spec);

/// dx/dt = A x + B u, y = Cvec x + D u, with u the source voltage and y the
/// current into the output element. States are inductor fluxes and capacitor
/// charges.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd Cvec;
    double D = 0.0;
    std::vector<std::string> state_labels;

    int size() const { return static_cast<int>(A.rows()); }
};

StateSpace derive_state_space(const CausalBondGraph& graph);

/// Characteristic polynomial det(sI - A), ascending and monic, and the
/// matrices M_1..M_n with adj(sI - A) = sum_k M_k s^(n-k).
struct FaddeevLeverrier {
    std::vector<double> char_poly;
    std::vector<Eigen::MatrixXd> adjugate_terms;
};

FaddeevLeverrier faddeev_leverrier(const Eigen::MatrixXd& A);

/// lhs = det(sI - A), forcing = Cvec adj(sI - A) B + D det(sI - A). Trailing
/// zero forcing coefficients are dropped.
LinearOde state_space_to_ode(const StateSpace& ss);

/// Largest coefficient mismatch after scaling both equations to a unit
/// leading lhs coefficient. Non-zero reference entries are compared
/// relatively; zero entries relative to the largest entry of their vector.
double projective_mismatch(const LinearOde& derived, const LinearOde& reference);

}  // namespace rlcnet
