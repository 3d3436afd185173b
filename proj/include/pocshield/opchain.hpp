#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pocshield/dataset.hpp"
#include "pocshield/rng.hpp"
#include "pocshield/schema.hpp"

namespace posh {

// Unary mapping operators. PowN tags apply x^i; Pow1 is the identity path.
enum class UnaryOp {
    Log,   // ln(|x|+1) * sign(x)
    Sin,
    Cos,
    Tan,   // clamped to [-1e6, 1e6]
    PowM3, // x^-3, base guarded away from 0
    PowM2,
    PowM1,
    Pow1,
    Pow2,
    Pow3,
};

enum class BinaryOp { Add, Sub, Mul, Div };

// Operator urns for chain generation. Default matches the full operator
// family: {log, sin, cos, tan, x^i for i in {-3..3}\{0}} unary and
// {+, -, *, /} binary; each exponent is a distinct, equally likely tag.
struct FmopSet {
    std::vector<UnaryOp> unary;
    std::vector<BinaryOp> binary;

    static FmopSet standard();
};

// Recursive operator tree over source features. Size counts operator
// applications: leaves are 0, unary adds 1, binary adds sizes plus 1.
class OpChain {
public:
    struct Node;
    using NodePtr = std::unique_ptr<Node>;

    struct Node {
        enum class Kind { Leaf, Unary, Binary };
        Kind kind = Kind::Leaf;
        std::size_t feature = 0;  // Leaf
        UnaryOp uop = UnaryOp::Pow1;
        BinaryOp bop = BinaryOp::Add;
        NodePtr left;   // Unary child / Binary lhs
        NodePtr right;  // Binary rhs
    };

    OpChain() = default;
    explicit OpChain(NodePtr root) : root_(std::move(root)) {}
    OpChain(const OpChain& other);
    OpChain& operator=(const OpChain& other);
    OpChain(OpChain&&) = default;
    OpChain& operator=(OpChain&&) = default;

    static OpChain leaf(std::size_t feature);
    static OpChain unary(UnaryOp op, OpChain child);
    static OpChain binary(BinaryOp op, OpChain lhs, OpChain rhs);

    bool empty() const { return root_ == nullptr; }
    const Node* root() const { return root_.get(); }
    Node* mutable_root() { return root_.get(); }

    std::size_t size() const;
    std::size_t max_feature() const;
    void collect_leaves(std::vector<std::size_t>& out) const;

    // SAFE-MATH evaluation: log/tan/div/negative powers are guarded and
    // every node result saturates into [-1e150, 1e150], so the output is
    // finite for any finite input.
    double eval(const std::vector<double>& values) const;

    std::string to_text() const;
    static OpChain parse(const std::string& text);

    bool operator==(const OpChain& other) const;

private:
    NodePtr root_;
};

struct MapParams {
    std::vector<std::size_t> pool;  // candidate leaf features (F-bar)
    std::size_t max_size = 3;
    double prevalence_target = 100.0;  // percent of the full source schema
};

// A generated feature space: psi chains over a source schema.
struct FeatureMap {
    FeatureSchema source_schema;
    std::vector<OpChain> chains;
    std::uint64_t seed = 0;
    MapParams params;

    std::size_t psi() const { return chains.size(); }
    FeatureSchema mapped_schema() const;  // psi real features oc_0..oc_{psi-1}
};

// Draws a block of 1..max_size features uniformly with replacement.
std::vector<std::size_t> choose_features(const std::vector<std::size_t>& pool,
                                         std::size_t max_size, Rng& rng);

// One chain: wrap each block element in a uniform unary operator, then
// left-fold the block with uniform binary operators.
OpChain compute_new_feature(const std::vector<std::size_t>& pool,
                            std::size_t max_size, const FmopSet& fmop, Rng& rng);

FeatureMap generate_map(const FeatureSchema& schema, const MapParams& params,
                        std::size_t psi, const FmopSet& fmop, std::uint64_t seed);

// Percentage of the source schema's features appearing among the map's
// leaves.
double prevalence(const FeatureSchema& schema, const FeatureMap& map);

Dataset transform(const Dataset& dataset, const FeatureMap& map);

std::string serialize_map(const FeatureMap& map);
FeatureMap deserialize_map(const std::string& text);

const char* unary_name(UnaryOp op);
const char* binary_name(BinaryOp op);

}  // namespace posh
