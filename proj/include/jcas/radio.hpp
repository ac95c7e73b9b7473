#pragma once

#include <complex>
#include <span>
#include <vector>

namespace jcas::radio {

using Complex = std::complex<double>;
using ChannelVector = std::vector<Complex>;  // uplink channel h between a user and the array

// Maps any angle into the canonical range (-pi, pi].
double wrap_phase(double x);

// Analog beamformer: M phase shifters, implied complex weight (1/sqrt(M))*e^{j*theta_m}.
struct BeamVector {
    std::vector<double> phases;  // each in (-pi, pi]

    BeamVector() = default;
    explicit BeamVector(std::vector<double> ph);

    int num_antennas() const { return static_cast<int>(phases.size()); }
};

// The 2^r discrete phase values {-pi + 2*pi*k/2^r : k = 1..2^r}, all in (-pi, pi].
struct PhaseCodomain {
    int bits;

    explicit PhaseCodomain(int r);
    std::vector<double> values() const;
    int count() const { return 1 << bits; }

    // Circularly nearest codomain value; ties go to the smaller phase.
    double nearest(double phase) const;
};

struct ArrayGeometry {
    std::vector<double> positions;  // antenna positions along the array axis, meters
    double wavelength;              // meters, > 0

    ArrayGeometry(std::vector<double> pos, double lambda);

    int num_antennas() const { return static_cast<int>(positions.size()); }

    // Uniform linear array with the given element spacing (in wavelengths).
    static ArrayGeometry uniform_linear(int num_antennas, double wavelength,
                                        double spacing_wavelengths = 0.5);
};

// Complex weights of the beamformer: element m = (1/sqrt(M)) * e^{j*theta_m}.
std::vector<Complex> beam_weights(const BeamVector& beam);

// Snaps every phase to the circularly nearest codomain value.
BeamVector quantize(const BeamVector& beam, const PhaseCodomain& codomain);

// |w^H h|^2
double comm_gain(const BeamVector& beam, const ChannelVector& channel);

// Mean of comm_gain over a nonempty channel set.
double avg_comm_gain(const BeamVector& beam, const std::vector<ChannelVector>& channels);

// Steering vector: element m = e^{j*2*pi*d_m*sin(theta)/lambda}.
std::vector<Complex> array_response(const ArrayGeometry& geom, double theta);

// |w^H b_r(theta)|^2  (squared-magnitude convention throughout)
double sensing_gain(const BeamVector& beam, const ArrayGeometry& geom, double theta);

// Gain sweep normalized by M (the analytic maximum); values in [0, 1].
std::vector<std::pair<double, double>> beam_pattern(const BeamVector& beam,
                                                    const ArrayGeometry& geom,
                                                    std::span<const double> grid);

}  // namespace jcas::radio
