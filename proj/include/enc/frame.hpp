#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "enc/bitset.hpp"
#include "enc/error.hpp"
#include "enc/limits.hpp"

namespace enc {

// A named variable with a finite frame of discernment. Variables are immutable
// and shared; creation order fixes the canonical variable order used everywhere
// (scopes sort by it, strides derive from it, files declare it).
class Variable {
public:
    Variable(std::string name, std::vector<std::string> labels)
        : name_(std::move(name)), labels_(std::move(labels)), serial_(next_serial()) {
        if (labels_.empty()) throw ValidationError("variable '" + name_ + "' has an empty frame");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].empty())
                throw ValidationError("variable '" + name_ + "' has an empty frame label");
            if (!index_.emplace(labels_[i], i).second)
                throw ValidationError("variable '" + name_ + "' repeats frame label '" + labels_[i] + "'");
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t frame_size() const { return labels_.size(); }
    std::uint64_t serial() const { return serial_; }

    // Index of a label, or throws.
    std::size_t label_index(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw ValidationError("variable '" + name_ + "' has no frame label '" + label + "'");
        return it->second;
    }
    bool has_label(const std::string& label) const { return index_.count(label) != 0; }

private:
    static std::uint64_t next_serial() {
        static std::atomic<std::uint64_t> counter{0};
        return counter.fetch_add(1, std::memory_order_relaxed);
    }

    std::string name_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
    std::uint64_t serial_;
};

using VarPtr = std::shared_ptr<const Variable>;

inline VarPtr make_variable(std::string name, std::vector<std::string> labels) {
    return std::make_shared<const Variable>(std::move(name), std::move(labels));
}

// An ordered set of distinct variables. Order is canonical (declaration order),
// and configuration indices are row-major over it: the first variable moves
// slowest, the last has stride 1. This encoding is part of the file contract.
class Scope {
public:
    Scope() = default;

    explicit Scope(std::vector<VarPtr> vars, const Limits& limits = default_limits()) {
        std::sort(vars.begin(), vars.end(),
                  [](const VarPtr& a, const VarPtr& b) { return a->serial() < b->serial(); });
        for (std::size_t i = 0; i + 1 < vars.size(); ++i)
            if (vars[i]->serial() == vars[i + 1]->serial())
                throw ScopeError("scope lists variable '" + vars[i]->name() + "' twice");
        vars_ = std::move(vars);
        strides_.assign(vars_.size(), 1);
        cardinality_ = 1;
        for (std::size_t k = vars_.size(); k-- > 0;) {
            strides_[k] = cardinality_;
            const std::uint64_t sz = vars_[k]->frame_size();
            if (cardinality_ > limits.max_configs / sz)
                throw ResourceError("scope exceeds the configured product-space cap of " +
                                    std::to_string(limits.max_configs) + " configurations");
            cardinality_ *= sz;
        }
    }

    static Scope single(VarPtr v) { return Scope(std::vector<VarPtr>{std::move(v)}); }

    const std::vector<VarPtr>& variables() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    std::uint64_t cardinality() const { return cardinality_; }
    std::uint64_t stride(std::size_t k) const { return strides_[k]; }
    bool empty() const { return vars_.empty(); }

    bool operator==(const Scope& o) const {
        if (vars_.size() != o.vars_.size()) return false;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i]->serial() != o.vars_[i]->serial()) return false;
        return true;
    }
    bool operator!=(const Scope& o) const { return !(*this == o); }

    bool contains(const VarPtr& v) const {
        for (const auto& u : vars_)
            if (u->serial() == v->serial()) return true;
        return false;
    }
    bool contains(const Scope& sub) const {
        for (const auto& u : sub.vars_)
            if (!contains(u)) return false;
        return true;
    }

    std::size_t position_of(const VarPtr& v) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i]->serial() == v->serial()) return i;
        throw ScopeError("variable '" + v->name() + "' is not in this scope");
    }

    // Row-major index of a configuration given per-variable element indices.
    std::uint64_t encode(const std::vector<std::size_t>& digits) const {
        std::uint64_t idx = 0;
        for (std::size_t k = 0; k < vars_.size(); ++k) idx += digits[k] * strides_[k];
        return idx;
    }
    std::vector<std::size_t> decode(std::uint64_t idx) const {
        std::vector<std::size_t> digits(vars_.size());
        for (std::size_t k = 0; k < vars_.size(); ++k) {
            digits[k] = static_cast<std::size_t>(idx / strides_[k]);
            idx %= strides_[k];
        }
        return digits;
    }

    // Human-readable configuration: one label, or a (l1,l2,...) tuple.
    std::string config_name(std::uint64_t idx) const {
        const auto digits = decode(idx);
        if (vars_.size() == 1) return vars_[0]->labels()[digits[0]];
        std::string out = "(";
        for (std::size_t k = 0; k < vars_.size(); ++k) {
            if (k) out += ",";
            out += vars_[k]->labels()[digits[k]];
        }
        out += ")";
        return out;
    }

    std::string name() const {
        std::string out;
        for (std::size_t k = 0; k < vars_.size(); ++k) {
            if (k) out += ",";
            out += vars_[k]->name();
        }
        return out;
    }

private:
    std::vector<VarPtr> vars_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t cardinality_ = 1; // empty scope has the single empty configuration
};

inline Scope scope_union(const Scope& a, const Scope& b, const Limits& limits = default_limits()) {
    std::vector<VarPtr> vars = a.variables();
    for (const auto& v : b.variables())
        if (!a.contains(v)) vars.push_back(v);
    return Scope(std::move(vars), limits);
}

inline Scope scope_minus(const Scope& a, const Scope& b) {
    std::vector<VarPtr> vars;
    for (const auto& v : a.variables())
        if (!b.contains(v)) vars.push_back(v);
    return Scope(std::move(vars));
}

inline bool scopes_disjoint(const Scope& a, const Scope& b) {
    for (const auto& v : b.variables())
        if (a.contains(v)) return false;
    return true;
}

// Precomputed map from configuration indices of a superscope to those of a
// subscope (drop the extra coordinates). Workhorse of project/cylinder_extend.
class IndexProjection {
public:
    IndexProjection(const Scope& sup, const Scope& sub) : sup_(sup), sub_(sub) {
        if (!sup.contains(sub))
            throw ScopeError("projection target is not a subscope of the source");
        for (std::size_t k = 0; k < sub.arity(); ++k) {
            const auto& v = sub.variables()[k];
            terms_.push_back({sup.stride(sup.position_of(v)), v->frame_size(), sub.stride(k)});
        }
    }

    std::uint64_t operator()(std::uint64_t sup_idx) const {
        std::uint64_t out = 0;
        for (const auto& t : terms_) out += ((sup_idx / t.sup_stride) % t.size) * t.sub_stride;
        return out;
    }

    const Scope& sup() const { return sup_; }
    const Scope& sub() const { return sub_; }

private:
    struct Term {
        std::uint64_t sup_stride;
        std::uint64_t size;
        std::uint64_t sub_stride;
    };
    Scope sup_, sub_;
    std::vector<Term> terms_;
};

// A subset of a scope's configuration space.
class ConfigSet {
public:
    ConfigSet() = default;
    ConfigSet(Scope scope, Bitset bits) : scope_(std::move(scope)), bits_(std::move(bits)) {
        if (bits_.size() != scope_.cardinality())
            throw ScopeError("bitset width does not match the scope's cardinality");
    }

    static ConfigSet empty_set(const Scope& s) {
        return ConfigSet(s, Bitset(static_cast<std::size_t>(s.cardinality())));
    }
    static ConfigSet full_set(const Scope& s) {
        return ConfigSet(s, Bitset::full(static_cast<std::size_t>(s.cardinality())));
    }
    static ConfigSet of(const Scope& s, std::initializer_list<std::uint64_t> indices) {
        Bitset b(static_cast<std::size_t>(s.cardinality()));
        for (auto i : indices) b.set(static_cast<std::size_t>(i));
        return ConfigSet(s, std::move(b));
    }
    // Single-variable convenience: build from frame labels.
    static ConfigSet from_labels(const Scope& s, const std::vector<std::string>& labels) {
        if (s.arity() != 1)
            throw ScopeError("from_labels needs a single-variable scope; use from_configs");
        Bitset b(static_cast<std::size_t>(s.cardinality()));
        for (const auto& l : labels) b.set(s.variables()[0]->label_index(l));
        return ConfigSet(s, std::move(b));
    }
    // General: each configuration is one label per scope variable, in scope order.
    static ConfigSet from_configs(const Scope& s,
                                  const std::vector<std::vector<std::string>>& configs) {
        Bitset b(static_cast<std::size_t>(s.cardinality()));
        for (const auto& c : configs) {
            if (c.size() != s.arity())
                throw ValidationError("configuration lists " + std::to_string(c.size()) +
                                      " labels for a scope of " + std::to_string(s.arity()) +
                                      " variables");
            std::vector<std::size_t> digits(s.arity());
            for (std::size_t k = 0; k < s.arity(); ++k)
                digits[k] = s.variables()[k]->label_index(c[k]);
            b.set(static_cast<std::size_t>(s.encode(digits)));
        }
        return ConfigSet(s, std::move(b));
    }

    const Scope& scope() const { return scope_; }
    const Bitset& bits() const { return bits_; }
    std::size_t count() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }
    bool is_full() const { return bits_.is_full(); }

    ConfigSet operator&(const ConfigSet& o) const { return ConfigSet(check(o), bits_ & o.bits_); }
    ConfigSet operator|(const ConfigSet& o) const { return ConfigSet(check(o), bits_ | o.bits_); }
    ConfigSet minus(const ConfigSet& o) const { return ConfigSet(check(o), bits_.minus(o.bits_)); }
    ConfigSet complement() const { return ConfigSet(scope_, bits_.complement()); }

    bool is_subset_of(const ConfigSet& o) const { check(o); return bits_.is_subset_of(o.bits_); }
    bool intersects(const ConfigSet& o) const { check(o); return bits_.intersects(o.bits_); }
    bool operator==(const ConfigSet& o) const { return scope_ == o.scope_ && bits_ == o.bits_; }

    std::string to_string() const {
        std::string out = "{";
        bool first = true;
        bits_.for_each([&](std::size_t i) {
            if (!first) out += ",";
            first = false;
            out += scope_.config_name(i);
        });
        out += "}";
        return out;
    }

private:
    const Scope& check(const ConfigSet& o) const {
        if (scope_ != o.scope_) throw ScopeError("config sets live on different scopes");
        return scope_;
    }

    Scope scope_;
    Bitset bits_;
};

// Drop coordinates: the image of x under the projection sup -> sub.
inline ConfigSet project(const ConfigSet& x, const Scope& sub) {
    if (x.scope() == sub) return x;
    IndexProjection pr(x.scope(), sub);
    Bitset out(static_cast<std::size_t>(sub.cardinality()));
    x.bits().for_each([&](std::size_t i) { out.set(static_cast<std::size_t>(pr(i))); });
    return ConfigSet(sub, std::move(out));
}

// Cylinder: all configurations of sup whose projection lies in y.
inline ConfigSet cylinder_extend(const ConfigSet& y, const Scope& sup) {
    if (y.scope() == sup) return y;
    IndexProjection pr(sup, y.scope());
    const auto n = static_cast<std::size_t>(sup.cardinality());
    Bitset out(n);
    for (std::size_t i = 0; i < n; ++i)
        if (y.bits().test(static_cast<std::size_t>(pr(i)))) out.set(i);
    return ConfigSet(sup, std::move(out));
}

// A partition of one variable's frame into disjoint, covering, nonempty blocks,
// together with the synthetic coarse variable whose frame is the block list.
// Block order is canonical: ascending smallest member. The coarse frame reuses
// the base label for singleton blocks and names merged blocks s1, s2, ...
// (suffixed with ' on collision with an existing label).
class Partition {
public:
    Partition(VarPtr base, std::vector<Bitset> blocks, std::vector<std::string> labels = {},
              std::string coarse_name = "")
        : base_(std::move(base)) {
        const std::size_t n = base_->frame_size();
        for (const auto& blk : blocks) {
            if (blk.size() != n)
                throw ValidationError("partition block width does not match frame of '" +
                                      base_->name() + "'");
            if (blk.none())
                throw ValidationError("partition of '" + base_->name() + "' has an empty block");
        }
        std::sort(blocks.begin(), blocks.end(), [](const Bitset& a, const Bitset& b) {
            return a.members().front() < b.members().front();
        });
        Bitset seen(n);
        for (const auto& blk : blocks) {
            if (seen.intersects(blk))
                throw ValidationError("partition blocks of '" + base_->name() + "' overlap");
            seen = seen | blk;
        }
        if (!seen.is_full())
            throw ValidationError("partition blocks do not cover the frame of '" + base_->name() + "'");
        blocks_ = std::move(blocks);

        lambda_.assign(n, 0);
        for (std::size_t j = 0; j < blocks_.size(); ++j)
            blocks_[j].for_each([&](std::size_t i) { lambda_[i] = j; });

        if (labels.empty()) labels = default_labels();
        if (labels.size() != blocks_.size())
            throw ValidationError("partition label count does not match block count");
        if (coarse_name.empty()) coarse_name = base_->name() + "'";
        coarse_ = make_variable(std::move(coarse_name), std::move(labels));
    }

    const VarPtr& base() const { return base_; }
    const VarPtr& coarse() const { return coarse_; }
    const std::vector<Bitset>& blocks() const { return blocks_; }
    std::size_t block_of(std::size_t base_element) const { return lambda_[base_element]; }

    // Lambda lifted to subsets: the blocks a subset of the base frame touches.
    Bitset coarsen_subset(const Bitset& theta) const {
        Bitset out(blocks_.size());
        theta.for_each([&](std::size_t i) { out.set(lambda_[i]); });
        return out;
    }
    // The union of the blocks named by a subset of the coarse frame.
    Bitset refine_subset(const Bitset& x) const {
        Bitset out(base_->frame_size());
        x.for_each([&](std::size_t j) { out = out | blocks_[j]; });
        return out;
    }

private:
    std::vector<std::string> default_labels() const {
        std::vector<std::string> labels;
        std::size_t merged = 0;
        for (const auto& blk : blocks_) {
            const auto m = blk.members();
            if (m.size() == 1) {
                labels.push_back(base_->labels()[m[0]]);
            } else {
                std::string candidate = "s" + std::to_string(++merged);
                while (base_->has_label(candidate) ||
                       std::find(labels.begin(), labels.end(), candidate) != labels.end())
                    candidate += "'";
                labels.push_back(std::move(candidate));
            }
        }
        return labels;
    }

    VarPtr base_;
    VarPtr coarse_;
    std::vector<Bitset> blocks_;
    std::vector<std::size_t> lambda_; // base element -> block index
};

// Blocks given as label groups, e.g. {{"a1"},{"a2"},{"a3","a4","a5"}}.
inline Partition make_partition(const VarPtr& base,
                                const std::vector<std::vector<std::string>>& groups,
                                std::vector<std::string> labels = {},
                                std::string coarse_name = "") {
    std::vector<Bitset> blocks;
    blocks.reserve(groups.size());
    for (const auto& g : groups) {
        Bitset b(base->frame_size());
        for (const auto& l : g) b.set(base->label_index(l));
        blocks.push_back(std::move(b));
    }
    return Partition(base, std::move(blocks), std::move(labels), std::move(coarse_name));
}

} // namespace enc
