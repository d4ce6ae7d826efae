#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qrem/bits.hpp"
#include "qrem/rng.hpp"

namespace qrem {

/// A list of classical preparation circuits (basis bitstrings) used to
/// probe the measurement response of an n-qubit register.
struct DdotCollection {
    int n_qubits = 0;
    std::vector<std::string> circuits;

    void validate() const;
};

/// Outcome of the exhaustive perfection check for locality k: a
/// collection is perfect when every k-qubit subset sees every one of the
/// 2^k local input states at least once.
struct PerfectionReport {
    bool perfect = false;
    /// (subset, local state) cells that never occur.
    std::vector<std::pair<Subset, std::size_t>> missing;
};

/// Balance statistics for locality k.
struct BalanceReport {
    int k = 0;
    std::size_t n_circuits = 0;
    double max_tvd_from_uniform = 0.0;  ///< worst subset's distance from uniform
    double appearance_std = 0.0;        ///< std of appearance counts over all cells
    std::size_t missing_cells = 0;      ///< cells with zero appearances
};

/// Start from the two constant circuits and add `extra` uniformly random
/// bitstrings.  With `grow_until_perfect`, keep appending random circuits
/// until the collection is perfect for locality k.
DdotCollection generate_random_circuits(int n, int k, std::size_t extra, std::uint64_t seed,
                                        bool grow_until_perfect = false);

/// Circuits produced by one hash f: [n] -> [k]: for every non-constant
/// k-bit pattern X, the circuit Y with Y_j = X_{f(j)}.  The constant
/// patterns are omitted; they duplicate the two seed circuits.
std::vector<std::string> circuits_from_hash(const std::vector<int>& f, int k);

/// Start from the two constant circuits and add the circuits of
/// `n_hashes` random hash functions.  Size: 2 + n_hashes*(2^k - 2).
/// With `grow_until_perfect`, keep adding hash batches until perfect.
DdotCollection generate_hash_circuits(int n, int k, std::size_t n_hashes, std::uint64_t seed,
                                      bool grow_until_perfect = false);

/// Exhaustive perfection check over all C(n,k) subsets.
PerfectionReport is_perfect(const DdotCollection& c, int k);

enum class BoundMethod { random, hash };

/// Number of circuits sufficient for a random (resp. hashed) collection
/// to be perfect with probability at least 1 - delta.  Natural logs.
double circuits_bound(int n, int k, double delta, BoundMethod method);

/// Number of uniformly random circuits after which every k-qubit
/// marginal's appearance distribution is within eps of uniform in total
/// variation, with probability at least 1 - delta.
double balance_bound(int n, int k, double delta, double eps);

BalanceReport balance_report(const DdotCollection& c, int k);

/// Append `rounds` circuits, each built by fixing floor(n/k)
/// non-overlapping least-seen (subset, state) cells and filling the rest
/// of the bits at random.  Ties break toward the lowest subset index,
/// then the lowest state index.  Repairs imperfect collections and
/// flattens appearance counts.
DdotCollection heuristic_balance(const DdotCollection& c, int k, std::size_t rounds,
                                 std::uint64_t seed);

/// Text format: a "# ddot N=<n> k=<k>" header, then one circuit per line.
void save_collection(const std::string& path, const DdotCollection& c, int k);
std::pair<DdotCollection, int> load_collection(const std::string& path);

/// JSON export of the same content.
void save_collection_json(const std::string& path, const DdotCollection& c, int k);

} // namespace qrem
