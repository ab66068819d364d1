#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbench/types.hpp"

namespace qbench {

enum class ModelKind { bose_hubbard, fermi_hubbard, spin_chain, pxp_1d, pxp_2d };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct LatticeSpec {
    ModelKind kind = ModelKind::bose_hubbard;
    int length = 0; // chain length (1D models)
    int rows = 0;   // 2D PXP only
    int cols = 0;
    int n_bosons = 0;
    int n_up = 0;
    int n_down = 0;
    bool periodic = false; // PXP adjacency; open boundaries by default

    int sites() const { return kind == ModelKind::pxp_2d ? rows * cols : length; }
    // Length of a Configuration vector for this spec.
    int config_length() const { return kind == ModelKind::fermi_hubbard ? 2 * sites() : sites(); }
    void validate() const;

    static LatticeSpec bose_hubbard_chain(int sites, int bosons);
    static LatticeSpec fermi_hubbard_chain(int sites, int up, int down);
    static LatticeSpec spin_chain(int sites);
    static LatticeSpec pxp_chain(int sites, bool periodic = false);
    static LatticeSpec pxp_grid(int rows, int cols, bool periodic = false);
};

// Enumerated constrained configuration space with bidirectional maps.
// Configurations are unique and sorted lexicographically on the occupation
// sequence, so indices are stable across runs and platforms.
class Basis {
  public:
    const LatticeSpec& spec() const { return spec_; }
    std::int64_t dimension() const { return static_cast<std::int64_t>(configs_.size()); }

    const Configuration& configuration_of(std::int64_t i) const;
    // Dense index of z, or nullopt when z is not part of the constrained
    // space. Throws ValidationError on length mismatch.
    std::optional<std::int64_t> index_of(const Configuration& z) const;

    const std::vector<Configuration>& configurations() const { return configs_; }

    // Grid neighbours of a site (PXP adjacency; chain adjacency otherwise).
    std::vector<int> neighbours(int site) const;

    friend Basis enumerate_basis(const LatticeSpec& spec);

  private:
    LatticeSpec spec_;
    std::vector<Configuration> configs_;
};

Basis enumerate_basis(const LatticeSpec& spec);

// Independent combinatorial count used as an oracle for the enumerated
// dimension: C(N+L-1,N), C(L,N_up)*C(L,N_down), 2^L, or a transfer-matrix
// count for PXP.
std::int64_t basis_dimension_formula(const LatticeSpec& spec);

} // namespace qbench
