#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qrem/errors.hpp"

namespace qrem {

/// Qubit subset: strictly ascending, zero-based indices.
using Subset = std::vector<int>;

/// Bit-ordering convention used throughout: qubit 0 is the *leftmost*
/// character of a bitstring, and the basis index of a string is the
/// big-endian integer of its characters.  Restricting to a subset keeps
/// the qubits in ascending order and re-reads the surviving characters
/// big-endian.  So for "011" and subset {0,2} the local state is "01" = 1.

inline bool is_valid_subset(const Subset& s, int n_qubits) {
    int prev = -1;
    for (int q : s) {
        if (q <= prev || q >= n_qubits) return false;
        prev = q;
    }
    return true;
}

inline void require_subset(const Subset& s, int n_qubits, const char* what) {
    if (!is_valid_subset(s, n_qubits))
        throw ValidationError(std::string(what) + ": subset must be strictly ascending and within range");
}

/// Basis index of the characters of `bits` at the positions in `s`.
inline std::size_t index_of(const std::string& bits, const Subset& s) {
    std::size_t idx = 0;
    for (int q : s) {
        char c = bits.at(static_cast<std::size_t>(q));
        if (c != '0' && c != '1') throw ValidationError("bitstring contains a character other than 0/1");
        idx = (idx << 1) | static_cast<std::size_t>(c - '0');
    }
    return idx;
}

/// Basis index of a full bitstring.
inline std::size_t index_of(const std::string& bits) {
    std::size_t idx = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw ValidationError("bitstring contains a character other than 0/1");
        idx = (idx << 1) | static_cast<std::size_t>(c - '0');
    }
    return idx;
}

/// Bitstring of `width` characters whose basis index is `index`.
inline std::string bits_of(std::size_t index, int width) {
    std::string out(static_cast<std::size_t>(width), '0');
    for (int i = width - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<char>('0' + (index & 1u));
        index >>= 1;
    }
    if (index != 0) throw ValidationError("basis index does not fit the requested width");
    return out;
}

/// Value (0/1) of qubit `q` inside the basis index of an `n`-qubit register.
inline int bit_at(std::size_t index, int q, int n) {
    return static_cast<int>((index >> (n - 1 - q)) & 1u);
}

/// Local basis index of subset `s` inside a global `n`-qubit basis index.
inline std::size_t gather_bits(std::size_t global, const Subset& s, int n) {
    std::size_t idx = 0;
    for (int q : s) idx = (idx << 1) | ((global >> (n - 1 - q)) & 1u);
    return idx;
}

/// Global basis index with subset `s` set to `local` and all other qubits 0.
inline std::size_t scatter_bits(std::size_t local, const Subset& s, int n) {
    std::size_t global = 0;
    const int m = static_cast<int>(s.size());
    for (int j = 0; j < m; ++j) {
        std::size_t b = (local >> (m - 1 - j)) & 1u;
        global |= b << (n - 1 - s[static_cast<std::size_t>(j)]);
    }
    return global;
}

inline Subset subset_complement(const Subset& s, int n) {
    Subset out;
    std::size_t j = 0;
    for (int q = 0; q < n; ++q) {
        if (j < s.size() && s[j] == q) { ++j; continue; }
        out.push_back(q);
    }
    return out;
}

inline Subset subset_union(const Subset& a, const Subset& b) {
    Subset out;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) out.push_back(a[i++]);
        else if (i == a.size() || b[j] < a[i]) out.push_back(b[j++]);
        else { out.push_back(a[i]); ++i; ++j; }
    }
    return out;
}

inline Subset subset_difference(const Subset& a, const Subset& b) {
    Subset out;
    std::size_t j = 0;
    for (int q : a) {
        while (j < b.size() && b[j] < q) ++j;
        if (j == b.size() || b[j] != q) out.push_back(q);
    }
    return out;
}

inline bool subset_contains(const Subset& a, int q) {
    for (int x : a) { if (x == q) return true; if (x > q) return false; }
    return false;
}

inline bool subset_includes(const Subset& a, const Subset& b) {
    // true iff b is a subset of a
    std::size_t i = 0;
    for (int q : b) {
        while (i < a.size() && a[i] < q) ++i;
        if (i == a.size() || a[i] != q) return false;
    }
    return true;
}

/// All k-element subsets of {0,...,n-1} in lexicographic order.
inline std::vector<Subset> combinations(int n, int k) {
    std::vector<Subset> out;
    if (k < 0 || k > n) return out;
    Subset cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// log of the binomial coefficient C(n, k), natural base.
double log_binomial(int n, int k);

} // namespace qrem
