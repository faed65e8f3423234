#pragma once
#include <vector>

#include "cvqkd/fock.hpp"

namespace cvqkd {

enum class Detection { homodyne, heterodyne };

/// Signal constellation, detection choice, postselection cuts and the
/// reconciliation efficiency. Factories give the two quaternary variants;
/// arbitrary constellations are accepted for constraint assembly only.
struct ProtocolSpec {
  Detection detection = Detection::homodyne;
  double alpha = 0.4;
  std::vector<Complex> constellation;
  std::vector<double> probabilities;
  double delta_c = 0.0;  // homodyne acceptance threshold
  double delta_a = 0.0;  // heterodyne radial cut
  double delta_p = 0.0;  // heterodyne angular cut
  double beta = 0.95;

  static ProtocolSpec homodyne_protocol(double alpha);
  static ProtocolSpec heterodyne_protocol(double alpha);

  std::size_t num_states() const { return constellation.size(); }
  void validate() const;
};

/// Per-state channel expectations of q, p, n and d.
struct SimulatedMoments {
  struct Entry {
    double q, p, n, d;
  };
  std::vector<Entry> per_state;
};

/// One scalar equality Tr(rho * observable) = value.
struct Constraint {
  Matrix observable;  // Hermitian on A (x) B
  double value;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  Matrix rho_a;  // fixed reduced state on A
  int a_dim = 0;
  int b_dim = 0;
  int ab_dim() const { return a_dim * b_dim; }
};

/// Single-Kraus postprocessing map G(rho) = K rho K^dag with
/// K = sum_z |z> (x) F_z, plus the key-register pinching Z.
/// `sift_scale` renormalizes protocol-1 objectives to key-generation rounds
/// (the Kraus A-projection keeps only the key-state mass).
struct PostprocessingMaps {
  int key_dim = 0;
  int ab_dim = 0;
  std::vector<Matrix> factors;  // F_z, each ab_dim x ab_dim
  double sift_scale = 1.0;
  Matrix kdag_k;  // sum_z F_z^dag F_z

  int g_dim() const { return key_dim * ab_dim; }
};

/// rho_A from the source-replacement scheme: Gram matrix of sqrt(p_x)|phi_x>.
Matrix alice_reduced_state(const ProtocolSpec& spec);

/// Coherent-state overlap <phi_b | phi_a>.
Complex coherent_overlap(Complex a, Complex b);

/// Moment, unit-trace and partial-trace constraints (16 + 1 + 16 scalars for
/// a quaternary constellation).
ConstraintSet build_constraints(const ProtocolSpec& spec, const SimulatedMoments& moments,
                                const FockDim& dim);

PostprocessingMaps kraus_homodyne(const ProtocolSpec& spec, const FockDim& dim);
PostprocessingMaps kraus_heterodyne(const ProtocolSpec& spec, const FockDim& dim);

/// G(rho) = K rho K^dag laid out in key_dim x key_dim blocks of size ab_dim.
Matrix apply_G(const PostprocessingMaps& maps, const Matrix& rho_ab);

/// Pinching of the key register: zeroes all off-diagonal key blocks.
Matrix apply_Z(const PostprocessingMaps& maps, const Matrix& sigma);

}  // namespace cvqkd
