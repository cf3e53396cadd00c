#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "enc/error.hpp"

namespace enc {

// Fixed-width packed bitset used to encode subsets of a frame: bit i set means
// configuration i is a member. Word 0 holds bits 0..63, so comparing words from
// the highest down gives plain integer order of the mask, which is the canonical
// order focal sets are stored and printed in.
class Bitset {
public:
    Bitset() = default;

    explicit Bitset(std::size_t nbits)
        : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    static Bitset full(std::size_t nbits) {
        Bitset b(nbits);
        for (auto& w : b.words_) w = ~std::uint64_t{0};
        b.trim();
        return b;
    }

    static Bitset single(std::size_t nbits, std::size_t i) {
        Bitset b(nbits);
        b.set(i);
        return b;
    }

    std::size_t size() const { return nbits_; }

    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }
    bool none() const { return !any(); }

    bool is_full() const { return count() == nbits_; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    Bitset operator&(const Bitset& o) const {
        Bitset r = *this;
        for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
        return r;
    }
    Bitset operator|(const Bitset& o) const {
        Bitset r = *this;
        for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= o.words_[k];
        return r;
    }
    // Set difference (this minus o).
    Bitset minus(const Bitset& o) const {
        Bitset r = *this;
        for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~o.words_[k];
        return r;
    }
    // Complement within the frame.
    Bitset complement() const {
        Bitset r = *this;
        for (auto& w : r.words_) w = ~w;
        r.trim();
        return r;
    }

    bool is_subset_of(const Bitset& o) const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & ~o.words_[k]) return false;
        return true;
    }
    bool intersects(const Bitset& o) const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & o.words_[k]) return true;
        return false;
    }

    bool operator==(const Bitset& o) const {
        return nbits_ == o.nbits_ && words_ == o.words_;
    }

    // Integer order of the mask value; total order used for focal-set maps and output.
    std::strong_ordering operator<=>(const Bitset& o) const {
        if (nbits_ != o.nbits_) return nbits_ <=> o.nbits_;
        for (std::size_t k = words_.size(); k-- > 0;) {
            if (words_[k] != o.words_[k]) return words_[k] <=> o.words_[k];
        }
        return std::strong_ordering::equal;
    }

    // Calls fn(i) for every member index, ascending.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t k = 0; k < words_.size(); ++k) {
            std::uint64_t w = words_[k];
            while (w) {
                const int b = std::countr_zero(w);
                fn(k * 64 + static_cast<std::size_t>(b));
                w &= w - 1;
            }
        }
    }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    std::size_t hash() const {
        std::size_t h = std::hash<std::size_t>{}(nbits_);
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    void trim() {
        if (nbits_ & 63) {
            words_.back() &= (std::uint64_t{1} << (nbits_ & 63)) - 1;
        }
        if (nbits_ == 0 && !words_.empty()) words_.clear();
    }

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace enc
