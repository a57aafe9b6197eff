#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "soundmap/corpus.hpp"

namespace soundmap::synth {

/// A virtual producer's sound profile: stereo width (0 = mono, 1 = fully
/// decorrelated, > 1 = increasingly anti-phase), spectral tilt in [0, 1]
/// (0 = dark, 1 = bright), and peak level.
struct ProducerProfile {
    std::string name;
    std::string group;
    double width = 0.5;
    double width_jitter = 0.1;
    double tilt = 0.5;
    double tilt_jitter = 0.05;
    double level = 0.6;
    double level_jitter = 0.05;
};

struct SynthConfig {
    int train_per_producer = 20;
    int holdout_per_producer = 5;
    double duration = 48.0; ///< seconds per song
    double sample_rate = 22050.0;
    std::uint64_t seed = 42;
    std::vector<ProducerProfile> producers; ///< empty means the three defaults
};

std::vector<ProducerProfile> default_producers();

/// Renders one song for the profile (seeded, deterministic).
StereoSignal synth_song(const ProducerProfile& profile, double duration, double sample_rate,
                        std::uint64_t seed);

/// Writes WAVs plus a manifest.csv into out_dir and returns the records.
/// Training songs get role producer-train, held-out songs rapper-collab.
std::vector<SongRecord> generate_corpus(const std::filesystem::path& out_dir,
                                        const SynthConfig& config);

} // namespace soundmap::synth
