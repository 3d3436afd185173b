#include "pocshield/opchain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pocshield/error.hpp"

namespace posh {

namespace {

constexpr double kSaturation = 1e150;
constexpr double kTanClamp = 1e6;
constexpr double kEps = 1e-6;

double sat(double v) {
    if (std::isnan(v)) return 0.0;
    if (v > kSaturation) return kSaturation;
    if (v < -kSaturation) return -kSaturation;
    return v;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

// keeps |x| >= eps, preserving sign (sign(0) = +1)
double guard(double v) {
    double m = std::max(std::abs(v), kEps);
    return sign_of(v) * m;
}

double apply_unary(UnaryOp op, double x) {
    switch (op) {
        case UnaryOp::Log: return sat(std::log(std::abs(x) + 1.0) * sign_of(x));
        case UnaryOp::Sin: return std::sin(x);
        case UnaryOp::Cos: return std::cos(x);
        case UnaryOp::Tan: return sat(std::clamp(std::tan(x), -kTanClamp, kTanClamp));
        case UnaryOp::PowM3: {
            double g = guard(x);
            return sat(1.0 / (g * g * g));
        }
        case UnaryOp::PowM2: {
            double g = guard(x);
            return sat(1.0 / (g * g));
        }
        case UnaryOp::PowM1: return sat(1.0 / guard(x));
        case UnaryOp::Pow1: return x;
        case UnaryOp::Pow2: return sat(x * x);
        case UnaryOp::Pow3: return sat(x * x * x);
    }
    return 0.0;
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::Add: return sat(a + b);
        case BinaryOp::Sub: return sat(a - b);
        case BinaryOp::Mul: return sat(a * b);
        case BinaryOp::Div: return sat(a / guard(b));
    }
    return 0.0;
}

OpChain::NodePtr clone_node(const OpChain::Node* n) {
    if (!n) return nullptr;
    auto out = std::make_unique<OpChain::Node>();
    out->kind = n->kind;
    out->feature = n->feature;
    out->uop = n->uop;
    out->bop = n->bop;
    out->left = clone_node(n->left.get());
    out->right = clone_node(n->right.get());
    return out;
}

const char* kUnaryNames[] = {"log", "sin", "cos", "tan", "pow-3",
                             "pow-2", "pow-1", "pow1", "pow2", "pow3"};
const char* kBinaryNames[] = {"add", "sub", "mul", "div"};

}  // namespace

const char* unary_name(UnaryOp op) { return kUnaryNames[static_cast<int>(op)]; }
const char* binary_name(BinaryOp op) { return kBinaryNames[static_cast<int>(op)]; }

FmopSet FmopSet::standard() {
    FmopSet s;
    s.unary = {UnaryOp::Log,   UnaryOp::Sin,   UnaryOp::Cos,  UnaryOp::Tan,
               UnaryOp::PowM3, UnaryOp::PowM2, UnaryOp::PowM1, UnaryOp::Pow1,
               UnaryOp::Pow2,  UnaryOp::Pow3};
    s.binary = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div};
    return s;
}

OpChain::OpChain(const OpChain& other) : root_(clone_node(other.root_.get())) {}

OpChain& OpChain::operator=(const OpChain& other) {
    if (this != &other) root_ = clone_node(other.root_.get());
    return *this;
}

OpChain OpChain::leaf(std::size_t feature) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Leaf;
    n->feature = feature;
    return OpChain(std::move(n));
}

OpChain OpChain::unary(UnaryOp op, OpChain child) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Unary;
    n->uop = op;
    n->left = std::move(child.root_);
    return OpChain(std::move(n));
}

OpChain OpChain::binary(BinaryOp op, OpChain lhs, OpChain rhs) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Binary;
    n->bop = op;
    n->left = std::move(lhs.root_);
    n->right = std::move(rhs.root_);
    return OpChain(std::move(n));
}

namespace {

std::size_t node_size(const OpChain::Node* n) {
    if (!n) return 0;
    switch (n->kind) {
        case OpChain::Node::Kind::Leaf: return 0;
        case OpChain::Node::Kind::Unary: return node_size(n->left.get()) + 1;
        case OpChain::Node::Kind::Binary:
            return node_size(n->left.get()) + node_size(n->right.get()) + 1;
    }
    return 0;
}

double node_eval(const OpChain::Node* n, const std::vector<double>& values) {
    switch (n->kind) {
        case OpChain::Node::Kind::Leaf: return values[n->feature];
        case OpChain::Node::Kind::Unary:
            return apply_unary(n->uop, node_eval(n->left.get(), values));
        case OpChain::Node::Kind::Binary:
            return apply_binary(n->bop, node_eval(n->left.get(), values),
                                node_eval(n->right.get(), values));
    }
    return 0.0;
}

void node_leaves(const OpChain::Node* n, std::vector<std::size_t>& out) {
    if (!n) return;
    if (n->kind == OpChain::Node::Kind::Leaf) {
        out.push_back(n->feature);
        return;
    }
    node_leaves(n->left.get(), out);
    node_leaves(n->right.get(), out);
}

void node_text(const OpChain::Node* n, std::string& out) {
    switch (n->kind) {
        case OpChain::Node::Kind::Leaf:
            out += 'f';
            out += std::to_string(n->feature);
            return;
        case OpChain::Node::Kind::Unary:
            out += '(';
            out += unary_name(n->uop);
            out += ' ';
            node_text(n->left.get(), out);
            out += ')';
            return;
        case OpChain::Node::Kind::Binary:
            out += '(';
            out += binary_name(n->bop);
            out += ' ';
            node_text(n->left.get(), out);
            out += ' ';
            node_text(n->right.get(), out);
            out += ')';
            return;
    }
}

bool node_equal(const OpChain::Node* a, const OpChain::Node* b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case OpChain::Node::Kind::Leaf: return a->feature == b->feature;
        case OpChain::Node::Kind::Unary:
            return a->uop == b->uop && node_equal(a->left.get(), b->left.get());
        case OpChain::Node::Kind::Binary:
            return a->bop == b->bop && node_equal(a->left.get(), b->left.get()) &&
                   node_equal(a->right.get(), b->right.get());
    }
    return false;
}

// Recursive-descent parser for the canonical chain grammar:
//   chain  := leaf | "(" unary chain ")" | "(" binary chain chain ")"
//   leaf   := "f" digits
class ChainParser {
public:
    explicit ChainParser(const std::string& text) : text_(text) {}

    OpChain parse() {
        skip_ws();
        OpChain c = parse_chain();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return c;
    }

private:
    [[noreturn]] void fail(const std::string& what) {
        raise(ErrorCode::ParseError,
              "chain parse error at position " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    OpChain parse_chain() {
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (text_[pos_] == 'f') return parse_leaf();
        if (text_[pos_] != '(') fail("expected 'f<index>' or '('");
        ++pos_;
        skip_ws();
        std::string op = parse_token();
        for (int i = 0; i < 10; ++i) {
            if (op == kUnaryNames[i]) {
                skip_ws();
                OpChain child = parse_chain();
                expect(')');
                return OpChain::unary(static_cast<UnaryOp>(i), std::move(child));
            }
        }
        for (int i = 0; i < 4; ++i) {
            if (op == kBinaryNames[i]) {
                skip_ws();
                OpChain lhs = parse_chain();
                skip_ws();
                OpChain rhs = parse_chain();
                expect(')');
                return OpChain::binary(static_cast<BinaryOp>(i), std::move(lhs),
                                       std::move(rhs));
            }
        }
        fail("unknown operator '" + op + "'");
    }

    OpChain parse_leaf() {
        ++pos_;  // 'f'
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ == start) fail("expected feature index after 'f'");
        return OpChain::leaf(std::stoull(text_.substr(start, pos_ - start)));
    }

    std::string parse_token() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '-'))
            ++pos_;
        if (pos_ == start) fail("expected operator name");
        return text_.substr(start, pos_ - start);
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

std::size_t node_max_feature(const OpChain::Node* n) {
    if (!n) return 0;
    if (n->kind == OpChain::Node::Kind::Leaf) return n->feature;
    std::size_t m = node_max_feature(n->left.get());
    if (n->right) m = std::max(m, node_max_feature(n->right.get()));
    return m;
}

}  // namespace

std::size_t OpChain::size() const { return node_size(root_.get()); }

std::size_t OpChain::max_feature() const { return node_max_feature(root_.get()); }

void OpChain::collect_leaves(std::vector<std::size_t>& out) const {
    node_leaves(root_.get(), out);
}

double OpChain::eval(const std::vector<double>& values) const {
    return node_eval(root_.get(), values);
}

std::string OpChain::to_text() const {
    std::string out;
    node_text(root_.get(), out);
    return out;
}

OpChain OpChain::parse(const std::string& text) { return ChainParser(text).parse(); }

bool OpChain::operator==(const OpChain& other) const {
    return node_equal(root_.get(), other.root_.get());
}

FeatureSchema FeatureMap::mapped_schema() const {
    std::vector<FeatureDescriptor> fs;
    fs.reserve(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        FeatureDescriptor f;
        f.name = "oc_" + std::to_string(i);
        f.group = FeatureGroup::Url;  // group is meaningless in mapped space
        f.domain = FeatureDomain::Real;
        fs.push_back(std::move(f));
    }
    return FeatureSchema(std::move(fs));
}

std::vector<std::size_t> choose_features(const std::vector<std::size_t>& pool,
                                         std::size_t max_size, Rng& rng) {
    if (pool.empty()) raise(ErrorCode::EmptyFeatureSet, "feature pool is empty");
    std::size_t len = 1 + static_cast<std::size_t>(rng.uniform_index(max_size));
    std::vector<std::size_t> block(len);
    for (auto& f : block) f = pool[rng.uniform_index(pool.size())];
    return block;
}

OpChain compute_new_feature(const std::vector<std::size_t>& pool,
                            std::size_t max_size, const FmopSet& fmop, Rng& rng) {
    if (fmop.unary.empty() || fmop.binary.empty()) {
        raise(ErrorCode::EmptyFeatureSet, "operator set must have both arities");
    }
    auto block = choose_features(pool, max_size, rng);
    std::vector<OpChain> wrapped;
    wrapped.reserve(block.size());
    for (std::size_t f : block) {
        UnaryOp u = fmop.unary[rng.uniform_index(fmop.unary.size())];
        wrapped.push_back(OpChain::unary(u, OpChain::leaf(f)));
    }
    OpChain acc = std::move(wrapped[0]);
    for (std::size_t h = 1; h < wrapped.size(); ++h) {
        BinaryOp b = fmop.binary[rng.uniform_index(fmop.binary.size())];
        acc = OpChain::binary(b, std::move(acc), std::move(wrapped[h]));
    }
    return acc;
}

namespace {

std::set<std::size_t> map_coverage(const FeatureMap& map) {
    std::vector<std::size_t> leaves;
    for (const auto& c : map.chains) c.collect_leaves(leaves);
    return {leaves.begin(), leaves.end()};
}

// Replaces one duplicated leaf with a missing feature. Chain and leaf are
// drawn uniformly; draws landing on a sole-occurrence leaf are skipped so
// coverage never decreases.
bool try_repair(FeatureMap& map, const std::set<std::size_t>& covered,
                const std::vector<std::size_t>& missing, Rng& rng) {
    std::vector<std::size_t> all_leaves;
    for (const auto& c : map.chains) c.collect_leaves(all_leaves);

    std::size_t chain_idx = rng.uniform_index(map.chains.size());
    std::vector<std::size_t> chain_leaves;
    map.chains[chain_idx].collect_leaves(chain_leaves);
    std::size_t leaf_idx = rng.uniform_index(chain_leaves.size());
    std::size_t old_feature = chain_leaves[leaf_idx];

    std::size_t occurrences = 0;
    for (std::size_t f : all_leaves)
        if (f == old_feature) ++occurrences;
    if (occurrences < 2 && covered.count(old_feature)) return false;

    std::size_t replacement = missing[rng.uniform_index(missing.size())];

    // rewrite the leaf_idx-th leaf of the chosen chain (in-order)
    std::size_t seen = 0;
    std::function<bool(OpChain::Node*)> rewrite = [&](OpChain::Node* n) -> bool {
        if (!n) return false;
        if (n->kind == OpChain::Node::Kind::Leaf) {
            if (seen++ == leaf_idx) {
                n->feature = replacement;
                return true;
            }
            return false;
        }
        return rewrite(n->left.get()) || rewrite(n->right.get());
    };
    rewrite(map.chains[chain_idx].mutable_root());
    return true;
}

}  // namespace

FeatureMap generate_map(const FeatureSchema& schema, const MapParams& params,
                        std::size_t psi, const FmopSet& fmop, std::uint64_t seed) {
    if (psi == 0) raise(ErrorCode::ConfigError, "psi must be >= 1");
    if (params.max_size == 0) raise(ErrorCode::ConfigError, "max_size must be >= 1");
    MapParams p = params;
    if (p.pool.empty()) {
        p.pool.resize(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i) p.pool[i] = i;
    }
    for (std::size_t f : p.pool) {
        if (f >= schema.size()) {
            raise(ErrorCode::SchemaMismatch, "pool feature index out of range");
        }
    }
    const std::size_t needed = static_cast<std::size_t>(
        std::ceil(p.prevalence_target / 100.0 * static_cast<double>(schema.size())));
    if (needed > p.pool.size() || needed > psi * p.max_size) {
        raise(ErrorCode::PrevalenceUnreachable,
              "need " + std::to_string(needed) + " distinct features but pool has " +
                  std::to_string(p.pool.size()) + " and the map holds at most " +
                  std::to_string(psi * p.max_size) + " leaves");
    }

    Rng rng(seed);
    FeatureMap map;
    map.source_schema = schema;
    map.seed = seed;
    map.params = p;

    const std::size_t budget = 10 * schema.size();
    for (int generation = 0; generation < 100; ++generation) {
        map.chains.clear();
        map.chains.reserve(psi);
        std::size_t total_leaves = 0;
        for (std::size_t h = 0; h < psi; ++h) {
            map.chains.push_back(compute_new_feature(p.pool, p.max_size, fmop, rng));
            std::vector<std::size_t> leaves;
            map.chains.back().collect_leaves(leaves);
            total_leaves += leaves.size();
        }
        // repair re-points duplicated leaves; with fewer leaf slots than
        // required distinct features it cannot succeed, so redraw instead
        if (total_leaves < needed) continue;

        for (std::size_t attempt = 0; attempt < budget; ++attempt) {
            auto covered = map_coverage(map);
            if (covered.size() >= needed) return map;
            std::vector<std::size_t> missing;
            for (std::size_t f : p.pool)
                if (!covered.count(f)) missing.push_back(f);
            try_repair(map, covered, missing, rng);
        }
        if (map_coverage(map).size() >= needed) return map;
    }
    raise(ErrorCode::RepairBudgetExceeded,
          "prevalence repair did not reach target within the drawing budget");
}

double prevalence(const FeatureSchema& schema, const FeatureMap& map) {
    if (!(map.source_schema == schema)) {
        raise(ErrorCode::SchemaMismatch, "map was generated for a different schema");
    }
    return 100.0 * static_cast<double>(map_coverage(map).size()) /
           static_cast<double>(schema.size());
}

Dataset transform(const Dataset& dataset, const FeatureMap& map) {
    if (!(dataset.schema() == map.source_schema)) {
        raise(ErrorCode::SchemaMismatch, "dataset schema does not match map");
    }
    FeatureSchema mapped = map.mapped_schema();
    std::vector<Sample> rows;
    rows.reserve(dataset.size());
    for (const auto& s : dataset.samples()) {
        Sample out;
        out.label = s.label;
        out.values.reserve(map.chains.size());
        for (const auto& c : map.chains) out.values.push_back(c.eval(s.values));
        rows.push_back(std::move(out));
    }
    return Dataset(std::move(mapped), std::move(rows), dataset.name() + ".mapped");
}

std::string serialize_map(const FeatureMap& map) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(map.source_schema.fingerprint()));
    std::ostringstream out;
    out << "pocmap v1\n";
    out << "schema_hash " << hash << "\n";
    out << "seed " << map.seed << "\n";
    out << "psi " << map.chains.size() << "\n";
    out << "max_size " << map.params.max_size << "\n";
    char tgt[64];
    std::snprintf(tgt, sizeof tgt, "%.17g", map.params.prevalence_target);
    out << "prevalence_target " << tgt << "\n";
    out << "pool";
    for (std::size_t f : map.params.pool) out << " f" << f;
    out << "\n";
    // the schema travels inline so a map file is self-contained
    out << "schema " << nlohmann::json::parse(map.source_schema.to_json()).dump() << "\n";
    for (const auto& c : map.chains) out << "chain " << c.to_text() << "\n";
    return out.str();
}

FeatureMap deserialize_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next = [&](const char* key) -> std::string {
        if (!std::getline(in, line)) {
            raise(ErrorCode::ParseError, std::string("map file: missing '") + key + "' line");
        }
        std::string prefix = std::string(key) + " ";
        if (line.rfind(prefix, 0) != 0) {
            raise(ErrorCode::ParseError,
                  std::string("map file: expected '") + key + "' line, got: " + line);
        }
        return line.substr(prefix.size());
    };

    if (!std::getline(in, line) || line != "pocmap v1") {
        raise(ErrorCode::ParseError, "map file: bad magic line");
    }
    std::string hash_text = next("schema_hash");
    FeatureMap map;
    map.seed = std::stoull(next("seed"));
    std::size_t psi = std::stoull(next("psi"));
    map.params.max_size = std::stoull(next("max_size"));
    map.params.prevalence_target = std::stod(next("prevalence_target"));
    {
        std::istringstream pool_in(next("pool"));
        std::string tok;
        while (pool_in >> tok) {
            if (tok.size() < 2 || tok[0] != 'f') {
                raise(ErrorCode::ParseError, "map file: bad pool token: " + tok);
            }
            map.params.pool.push_back(std::stoull(tok.substr(1)));
        }
    }
    map.source_schema = FeatureSchema::from_json(next("schema"));
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(map.source_schema.fingerprint()));
    if (hash_text != hash) {
        raise(ErrorCode::ParseError, "map file: schema hash does not match inline schema");
    }
    for (std::size_t i = 0; i < psi; ++i) {
        map.chains.push_back(OpChain::parse(next("chain")));
        if (map.chains.back().max_feature() >= map.source_schema.size()) {
            raise(ErrorCode::ParseError, "map file: chain leaf index out of range");
        }
    }
    return map;
}

}  // namespace posh
