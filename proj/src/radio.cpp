#include "jcas/radio.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jcas::radio {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Circular distance between two angles, in [0, pi].
double circular_distance(double a, double b) {
    double d = std::fabs(wrap_phase(a - b));
    return d;
}
}  // namespace

double wrap_phase(double x) {
    double r = std::fmod(x + kPi, kTwoPi);
    if (r <= 0.0) r += kTwoPi;
    return r - kPi;  // (-pi, pi]
}

BeamVector::BeamVector(std::vector<double> ph) : phases(std::move(ph)) {
    if (phases.empty()) throw std::invalid_argument("BeamVector needs at least one phase");
    for (double& p : phases) p = wrap_phase(p);
}

PhaseCodomain::PhaseCodomain(int r) : bits(r) {
    if (r < 1 || r > 24) throw std::invalid_argument("phase codomain bits out of range");
}

std::vector<double> PhaseCodomain::values() const {
    const int n = count();
    std::vector<double> v(n);
    for (int k = 1; k <= n; ++k) v[k - 1] = -kPi + kTwoPi * k / n;
    return v;
}

double PhaseCodomain::nearest(double phase) const {
    const double p = wrap_phase(phase);
    const int n = count();
    double best = -kPi + kTwoPi / n;
    double best_dist = circular_distance(p, best);
    for (int k = 2; k <= n; ++k) {
        const double cand = -kPi + kTwoPi * k / n;
        const double d = circular_distance(p, cand);
        // strict < keeps the smaller phase value on ties (values ascend)
        if (d < best_dist) {
            best_dist = d;
            best = cand;
        }
    }
    return best;
}

ArrayGeometry::ArrayGeometry(std::vector<double> pos, double lambda)
    : positions(std::move(pos)), wavelength(lambda) {
    if (positions.empty()) throw std::invalid_argument("ArrayGeometry needs antennas");
    if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
    for (double d : positions)
        if (!std::isfinite(d)) throw std::invalid_argument("antenna positions must be finite");
}

ArrayGeometry ArrayGeometry::uniform_linear(int num_antennas, double wavelength,
                                            double spacing_wavelengths) {
    if (num_antennas < 1) throw std::invalid_argument("need at least one antenna");
    std::vector<double> pos(num_antennas);
    for (int m = 0; m < num_antennas; ++m) pos[m] = m * spacing_wavelengths * wavelength;
    return ArrayGeometry(std::move(pos), wavelength);
}

std::vector<Complex> beam_weights(const BeamVector& beam) {
    const int m = beam.num_antennas();
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<Complex> w(m);
    for (int i = 0; i < m; ++i) w[i] = std::polar(amp, beam.phases[i]);
    return w;
}

BeamVector quantize(const BeamVector& beam, const PhaseCodomain& codomain) {
    BeamVector out = beam;
    for (double& p : out.phases) p = codomain.nearest(p);
    return out;
}

double comm_gain(const BeamVector& beam, const ChannelVector& channel) {
    if (beam.num_antennas() != static_cast<int>(channel.size()))
        throw std::invalid_argument("comm_gain: beam has " + std::to_string(beam.num_antennas()) +
                                    " antennas, channel has " + std::to_string(channel.size()));
    const double amp = 1.0 / std::sqrt(static_cast<double>(beam.num_antennas()));
    Complex acc{0.0, 0.0};
    for (size_t i = 0; i < channel.size(); ++i)
        acc += std::conj(std::polar(amp, beam.phases[i])) * channel[i];
    return std::norm(acc);
}

double avg_comm_gain(const BeamVector& beam, const std::vector<ChannelVector>& channels) {
    if (channels.empty()) throw std::invalid_argument("avg_comm_gain: empty channel set");
    double sum = 0.0;
    for (const auto& h : channels) sum += comm_gain(beam, h);
    return sum / static_cast<double>(channels.size());
}

std::vector<Complex> array_response(const ArrayGeometry& geom, double theta) {
    const double s = std::sin(theta);
    std::vector<Complex> b(geom.positions.size());
    for (size_t m = 0; m < geom.positions.size(); ++m)
        b[m] = std::polar(1.0, kTwoPi * geom.positions[m] * s / geom.wavelength);
    return b;
}

double sensing_gain(const BeamVector& beam, const ArrayGeometry& geom, double theta) {
    if (beam.num_antennas() != geom.num_antennas())
        throw std::invalid_argument("sensing_gain: beam/geometry antenna count mismatch");
    const double amp = 1.0 / std::sqrt(static_cast<double>(beam.num_antennas()));
    const double s = std::sin(theta);
    Complex acc{0.0, 0.0};
    for (int m = 0; m < geom.num_antennas(); ++m) {
        const double steer = kTwoPi * geom.positions[m] * s / geom.wavelength;
        acc += std::polar(amp, steer - beam.phases[m]);
    }
    return std::norm(acc);
}

std::vector<std::pair<double, double>> beam_pattern(const BeamVector& beam,
                                                    const ArrayGeometry& geom,
                                                    std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("beam_pattern: empty angle grid");
    const double max_gain = static_cast<double>(beam.num_antennas());
    std::vector<std::pair<double, double>> pattern;
    pattern.reserve(grid.size());
    for (double theta : grid)
        pattern.emplace_back(theta, sensing_gain(beam, geom, theta) / max_gain);
    return pattern;
}

}  // namespace jcas::radio
