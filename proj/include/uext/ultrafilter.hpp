#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uext/presentation.hpp"
#include "uext/structure.hpp"

namespace uext::uf {

/// Ultrafilter over a finite universe — always principal, stored by its
/// generator. The full set family is enumerable on demand for the
/// characterization tests.
struct Ultrafilter {
    int generator = -1;
    int universe = 0;

    static Ultrafilter principal(const Structure& a, int w);
    static Ultrafilter principal(const Structure& a, const std::string& name);

    bool contains(const NodeSet& x) const;
    bool operator==(const Ultrafilter&) const = default;
};

struct UfOptions {
    int max_universe = 20;  // subset enumeration is 2^|A|
    int threads = 1;
};

/// All members of the ultrafilter, by subset enumeration (capped).
std::vector<NodeSet> family(const Structure& a, const Ultrafilter& u, const UfOptions& opt = {});

/// The extension relation between two ultrafilters, decided from the
/// definition under the relation q: every member of v has its one-step
/// preimage in u. Both this and the dual image characterization are
/// evaluated by full subset enumeration and must agree.
bool ue_related(const Structure& a, RelKind q, const Ultrafilter& u, const Ultrafilter& v,
                const UfOptions& opt = {});
bool ue_related(const Structure& a, const Ultrafilter& u, const Ultrafilter& v,
                const UfOptions& opt = {});

/// The pointwise variant: u and v are related iff the set of points whose
/// successor set lies in v is itself in u.
bool tilde_related(const Structure& a, const Ultrafilter& u, const Ultrafilter& v,
                   const UfOptions& opt = {});

struct UeExtensionResult {
    Structure extension;                         // nodes pi_<name>
    std::map<std::string, std::string> witness;  // name -> pi_<name>
    bool isomorphic = false;                     // witness verified edge-by-edge
};

/// The structure of all ultrafilters with the extension relation; over a
/// finite universe this is an isomorphic copy, and the witnessing map is
/// returned and verified.
UeExtensionResult ue_extension_finite(const Structure& a, const UfOptions& opt = {});

/// Pairwise disjoint sets separating the given (distinct) ultrafilters:
/// D_j belongs to u_i exactly when i = j.
std::vector<NodeSet> distinguishing_sets(const Structure& a, const std::vector<Ultrafilter>& us);

/// Transports X along a road of ultrafilters: starting from X, each step
/// takes the forward image (or preimage, per the step direction) and cuts
/// it down to the next ultrafilter's distinguishing set. The result is
/// guaranteed to land in the final ultrafilter.
NodeSet ultrafilter_road_delta(const Structure& a, RelKind q, const NodeSet& x,
                               const std::vector<Ultrafilter>& road,
                               const std::vector<bool>& forward,
                               const std::vector<NodeSet>& dsets, const UfOptions& opt = {});

// --- symbolic ultrafilters over presentations ------------------------------

/// A point of an extension presentation: a hub, a copy position, or a
/// non-principal point (block type, position, bundle). Two non-principal
/// points are equal iff all three coordinates match.
struct SymbolicUltrafilter {
    enum class Kind { Hub, Copy, NonPrincipal };

    Kind kind = Kind::Hub;
    std::string hub;        // Hub
    std::string block;      // Copy, NonPrincipal
    std::uint64_t copy = 0; // Copy
    std::string pos;        // Copy, NonPrincipal
    std::uint64_t bundle = 0;  // NonPrincipal

    static SymbolicUltrafilter at_hub(std::string h);
    static SymbolicUltrafilter at_copy(std::string block, std::uint64_t copy, std::string pos);
    static SymbolicUltrafilter non_principal(std::string block, std::string pos, std::uint64_t bundle);

    std::string to_string() const;
};

/// The extension relation between symbolic points: principal pairs follow
/// the presented base relation; hub-to-non-principal pairs follow the
/// non-principal block's uniform flags; non-hub principal points never
/// relate to non-principal ones; non-principal pairs relate only inside
/// one bundle, along pattern edges.
bool symbolic_ue_related(const pres::Presentation& p, const SymbolicUltrafilter& su,
                         const SymbolicUltrafilter& sv);

// --- exhaustive sweep kernels ----------------------------------------------

/// Relations on n nodes encoded row-major: bit i*n+j is edge i -> j.
Structure structure_from_code(int n, std::uint64_t code);

struct SweepResult {
    long long instances = 0;
    long long failures = 0;
};

/// Over every relation code in [begin, end) on n nodes and every principal
/// pair, checks that the two definitional characterizations agree (and
/// both reduce to the base edge). threads=1 is the serial reference.
SweepResult ue_agreement_sweep(int n, std::uint64_t begin, std::uint64_t end, int threads = 1);

/// Over every relation code in [begin, end), checks the reflexivity law:
/// a principal point is extension-reflexive iff its generator has a loop
/// (decided definitionally on both characterizations).
SweepResult ue_reflexivity_sweep(int n, std::uint64_t begin, std::uint64_t end, int threads = 1);

}  // namespace uext::uf
