#include "soundmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "soundmap/csv.hpp"
#include "soundmap/rng.hpp"

namespace soundmap::synth {

namespace {

/// Tilted noise: crossfade between one-pole low-passed and the residual
/// high-passed part. tilt 0 = dark, 1 = bright.
std::vector<double> tilted_noise(std::size_t n, double tilt, double sample_rate, Rng& rng) {
    const double cutoff = 800.0;
    const double alpha = 1.0 - std::exp(-2.0 * 3.141592653589793 * cutoff / sample_rate);
    std::vector<double> out(n);
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        lp += alpha * (x - lp);
        out[i] = (1.0 - tilt) * lp + tilt * (x - lp);
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

std::vector<ProducerProfile> default_producers() {
    return {
        {"Narrowline", "alpha", 0.10, 0.06, 0.20, 0.06, 0.35, 0.05},
        {"Widefield", "beta", 1.00, 0.20, 0.50, 0.06, 0.60, 0.05},
        {"Phaseflip", "gamma", 3.00, 0.50, 0.80, 0.06, 0.90, 0.05},
    };
}

StereoSignal synth_song(const ProducerProfile& profile, double duration, double sample_rate,
                        std::uint64_t seed) {
    if (duration <= 0.0 || sample_rate <= 0.0) {
        throw std::invalid_argument("synth_song: invalid duration or sample rate");
    }
    Rng rng(seed);
    const double width = std::max(0.0, profile.width + rng.uniform(-1.0, 1.0) * profile.width_jitter);
    const double tilt =
        std::clamp(profile.tilt + rng.uniform(-1.0, 1.0) * profile.tilt_jitter, 0.0, 1.0);
    const double level =
        std::clamp(profile.level + rng.uniform(-1.0, 1.0) * profile.level_jitter, 0.05, 0.99);

    const std::size_t n = static_cast<std::size_t>(std::llround(duration * sample_rate));
    const auto mid = tilted_noise(n, tilt, sample_rate, rng);
    const auto side = tilted_noise(n, tilt, sample_rate, rng);

    StereoSignal signal;
    signal.sample_rate = sample_rate;
    signal.left.resize(n);
    signal.right.resize(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        signal.left[i] = mid[i] - width * side[i];
        signal.right[i] = mid[i] + width * side[i];
        peak = std::max({peak, std::abs(signal.left[i]), std::abs(signal.right[i])});
    }
    if (peak > 0.0) {
        const double gain = level / peak;
        for (std::size_t i = 0; i < n; ++i) {
            signal.left[i] *= gain;
            signal.right[i] *= gain;
        }
    }
    return signal;
}

std::vector<SongRecord> generate_corpus(const std::filesystem::path& out_dir,
                                        const SynthConfig& config) {
    if (config.train_per_producer < 1 || config.holdout_per_producer < 0) {
        throw std::invalid_argument("generate_corpus: invalid song counts");
    }
    const auto producers = config.producers.empty() ? default_producers() : config.producers;
    std::filesystem::create_directories(out_dir / "audio");

    static const char* kGuests[] = {"MC Ada", "MC Böhm", "MC Curie", "MC Dijkstra", "MC Euler"};

    std::vector<SongRecord> records;
    std::ostringstream manifest;
    manifest << "# synthetic corpus (seed " << config.seed << ")\n";
    manifest << "id,path,performer,producer,role,group\n";

    for (std::size_t pi = 0; pi < producers.size(); ++pi) {
        const auto& producer = producers[pi];
        const int total = config.train_per_producer + config.holdout_per_producer;
        for (int si = 0; si < total; ++si) {
            const bool training = si < config.train_per_producer;
            std::ostringstream id;
            id << "p" << pi << "s" << (si < 10 ? "0" : "") << si;
            const std::string rel = "audio/" + id.str() + ".wav";

            const auto signal = synth_song(producer, config.duration, config.sample_rate,
                                           mix_seed(config.seed, pi * 1000 + si));
            write_wav(out_dir / rel, signal, WavFormat::Pcm16);

            SongRecord rec;
            rec.id = id.str();
            rec.path = out_dir / rel;
            rec.performer = training ? producer.name + " House Act"
                                     : kGuests[si % (sizeof(kGuests) / sizeof(kGuests[0]))];
            rec.producer = producer.name;
            rec.role = training ? SongRole::ProducerTrain : SongRole::RapperCollab;
            rec.group = producer.group;
            records.push_back(rec);

            manifest << csv::escape_field(rec.id) << "," << rel << ","
                     << csv::escape_field(rec.performer) << "," << csv::escape_field(rec.producer)
                     << "," << to_string(rec.role) << "," << csv::escape_field(rec.group) << "\n";
        }
    }

    std::ofstream out(out_dir / "manifest.csv", std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write manifest in " + out_dir.string());
    }
    const std::string text = manifest.str();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    return records;
}

} // namespace soundmap::synth
