#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace soundmap {

/// Which part a song plays in the analysis: map training vs. projection.
enum class SongRole {
    ProducerTrain,     ///< trains the map
    RapperCollab,      ///< projected onto the trained map
    RapperSelfProduced ///< projected onto the trained map
};

std::string to_string(SongRole role);
SongRole role_from_string(const std::string& text);

/// One corpus entry from the manifest.
struct SongRecord {
    std::string id;
    std::filesystem::path path;
    std::string performer;
    std::string producer;
    SongRole role = SongRole::ProducerTrain;
    std::string group;
};

/// Two equal-length channels of dimensionless amplitude in [-1, 1].
struct StereoSignal {
    std::vector<double> left;
    std::vector<double> right;
    double sample_rate = 0.0;

    std::size_t frames() const { return left.size(); }
    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(left.size()) / sample_rate : 0.0;
    }
};

/// The fixed analysis window cut from a song.
struct StereoSegment {
    std::vector<double> left;
    std::vector<double> right;
    double sample_rate = 0.0;
    double source_offset = 0.0; ///< seconds into the source signal
    bool truncated = false;     ///< source was shorter than the requested window

    std::size_t frames() const { return left.size(); }
};

enum class WavFormat { Pcm16, Pcm24, Pcm32, Float32 };

/// Parses the corpus manifest CSV (header `id,path,performer,producer,role,group`,
/// `#` comment lines ignored). Relative audio paths are resolved against the
/// manifest's directory. Throws std::runtime_error with the offending line
/// number on parse errors, duplicate ids, or unknown role values.
std::vector<SongRecord> load_manifest(const std::filesystem::path& path);

/// Decodes a stereo RIFF/WAVE file. Accepts PCM 16/24/32-bit integer and
/// 32-bit float, exactly 2 channels, sample rates 22050-96000 Hz. Integer
/// samples are scaled by 2^(bits-1); float samples are clamped to [-1, 1].
StereoSignal decode_wav(const std::filesystem::path& path);

/// Writes a stereo WAV file in the given sample format.
void write_wav(const std::filesystem::path& path, const StereoSignal& signal,
               WavFormat format = WavFormat::Pcm16);

/// Cuts `duration` seconds from the middle of the signal. Shorter signals are
/// returned whole with the truncated flag set.
StereoSegment extract_middle_segment(const StereoSignal& signal, double duration = 46.0);

} // namespace soundmap
