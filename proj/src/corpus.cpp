#include "soundmap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "soundmap/csv.hpp"

namespace soundmap {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void manifest_error(const std::filesystem::path& path, int line, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << what;
    throw std::runtime_error(os.str());
}

} // namespace

std::string to_string(SongRole role) {
    switch (role) {
    case SongRole::ProducerTrain: return "producer-train";
    case SongRole::RapperCollab: return "rapper-collab";
    case SongRole::RapperSelfProduced: return "rapper-selfproduced";
    }
    throw std::logic_error("invalid SongRole");
}

SongRole role_from_string(const std::string& text) {
    if (text == "producer-train") return SongRole::ProducerTrain;
    if (text == "rapper-collab") return SongRole::RapperCollab;
    if (text == "rapper-selfproduced") return SongRole::RapperSelfProduced;
    throw std::runtime_error("unknown role value '" + text + "'");
}

std::vector<SongRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open manifest " + path.string());
    }
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    static const std::vector<std::string> kHeader = {"id",   "path", "performer",
                                                     "producer", "role", "group"};
    std::vector<SongRecord> records;
    std::set<std::string> seen_ids;
    bool header_seen = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        std::vector<std::string> fields;
        try {
            fields = csv::split_line(line);
        } catch (const std::exception& e) {
            manifest_error(path, line_no, e.what());
        }
        for (auto& f : fields) {
            f = trim(f);
        }
        if (!header_seen) {
            if (fields != kHeader) {
                manifest_error(path, line_no,
                               "expected header id,path,performer,producer,role,group");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != kHeader.size()) {
            std::ostringstream os;
            os << "expected " << kHeader.size() << " fields, got " << fields.size();
            manifest_error(path, line_no, os.str());
        }
        SongRecord rec;
        rec.id = fields[0];
        if (rec.id.empty()) {
            manifest_error(path, line_no, "empty id");
        }
        if (!seen_ids.insert(rec.id).second) {
            manifest_error(path, line_no, "duplicate id '" + rec.id + "'");
        }
        if (fields[1].empty()) {
            manifest_error(path, line_no, "empty path for id '" + rec.id + "'");
        }
        std::filesystem::path audio = fields[1];
        rec.path = audio.is_absolute() ? audio : base / audio;
        rec.performer = fields[2];
        rec.producer = fields[3];
        try {
            rec.role = role_from_string(fields[4]);
        } catch (const std::exception& e) {
            manifest_error(path, line_no, e.what());
        }
        rec.group = fields[5];
        records.push_back(std::move(rec));
    }
    if (!header_seen) {
        throw std::runtime_error(path.string() + ": missing manifest header");
    }
    return records;
}

// ---------------------------------------------------------------------------
// WAV codec
// ---------------------------------------------------------------------------

namespace {

constexpr double kMinSampleRate = 22050.0;
constexpr double kMaxSampleRate = 96000.0;

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

struct WavError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace

StereoSignal decode_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open WAV file " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* data = reinterpret_cast<const std::uint8_t*>(bytes.data());
    const std::size_t size = bytes.size();

    auto fail = [&](const std::string& what) -> void {
        throw WavError(path.string() + ": " + what);
    };

    if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
        fail("not a RIFF/WAVE file");
    }

    std::uint16_t format_code = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
    bool fmt_seen = false;
    const std::uint8_t* pcm = nullptr;
    std::size_t pcm_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= size) {
        const std::uint8_t* chunk_id = data + pos;
        std::uint32_t chunk_size = read_u32(data + pos + 4);
        pos += 8;
        if (pos + chunk_size > size) {
            fail("truncated chunk");
        }
        if (std::memcmp(chunk_id, "fmt ", 4) == 0) {
            if (chunk_size < 16) {
                fail("fmt chunk too short");
            }
            format_code = read_u16(data + pos);
            channels = read_u16(data + pos + 2);
            sample_rate = read_u32(data + pos + 4);
            block_align = read_u16(data + pos + 12);
            bits = read_u16(data + pos + 14);
            if (format_code == 0xfffe) { // WAVE_FORMAT_EXTENSIBLE
                if (chunk_size < 40) {
                    fail("extensible fmt chunk too short");
                }
                format_code = read_u16(data + pos + 24); // first bytes of the sub-format GUID
            }
            fmt_seen = true;
        } else if (std::memcmp(chunk_id, "data", 4) == 0) {
            pcm = data + pos;
            pcm_size = chunk_size;
        }
        pos += chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!fmt_seen) {
        fail("missing fmt chunk");
    }
    if (pcm == nullptr) {
        fail("missing data chunk");
    }
    if (channels != 2) {
        fail("unsupported channel count " + std::to_string(channels) + " (need 2)");
    }
    const bool is_float = format_code == 3;
    if (format_code != 1 && !is_float) {
        fail("unsupported encoding (format code " + std::to_string(format_code) + ")");
    }
    if (is_float ? bits != 32 : (bits != 16 && bits != 24 && bits != 32)) {
        fail("unsupported bit depth " + std::to_string(bits));
    }
    if (sample_rate < kMinSampleRate || sample_rate > kMaxSampleRate) {
        fail("sample rate " + std::to_string(sample_rate) + " outside accepted 22050-96000 Hz");
    }
    const std::size_t bytes_per_sample = bits / 8;
    if (block_align != bytes_per_sample * 2) {
        fail("block alignment does not match 2-channel layout");
    }
    const std::size_t frames = pcm_size / block_align;

    StereoSignal signal;
    signal.sample_rate = sample_rate;
    signal.left.resize(frames);
    signal.right.resize(frames);

    const double scale = 1.0 / std::ldexp(1.0, static_cast<int>(bits) - 1); // 2^(bits-1)
    for (std::size_t f = 0; f < frames; ++f) {
        for (int ch = 0; ch < 2; ++ch) {
            const std::uint8_t* p = pcm + f * block_align + ch * bytes_per_sample;
            double value = 0.0;
            if (is_float) {
                float v;
                std::uint32_t raw = read_u32(p);
                std::memcpy(&v, &raw, 4);
                value = std::clamp(static_cast<double>(v), -1.0, 1.0);
            } else if (bits == 16) {
                value = static_cast<std::int16_t>(read_u16(p)) * scale;
            } else if (bits == 24) {
                std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
                if (v & 0x800000) {
                    v |= ~0xffffff; // sign-extend
                }
                value = v * scale;
            } else {
                value = static_cast<std::int32_t>(read_u32(p)) * scale;
            }
            (ch == 0 ? signal.left : signal.right)[f] = value;
        }
    }
    return signal;
}

void write_wav(const std::filesystem::path& path, const StereoSignal& signal, WavFormat format) {
    if (signal.left.size() != signal.right.size()) {
        throw std::invalid_argument("write_wav: channel length mismatch");
    }
    if (signal.sample_rate <= 0) {
        throw std::invalid_argument("write_wav: sample rate must be positive");
    }
    int bits = 16;
    bool is_float = false;
    switch (format) {
    case WavFormat::Pcm16: bits = 16; break;
    case WavFormat::Pcm24: bits = 24; break;
    case WavFormat::Pcm32: bits = 32; break;
    case WavFormat::Float32:
        bits = 32;
        is_float = true;
        break;
    }
    const std::uint16_t block_align = static_cast<std::uint16_t>(bits / 8 * 2);
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(signal.sample_rate));
    const std::uint32_t data_size = static_cast<std::uint32_t>(signal.frames() * block_align);

    std::string out;
    out.reserve(64 + data_size);
    out += "RIFF";
    const std::uint32_t fact_size = is_float ? 12 : 0;
    append_u32(out, 4 + (8 + 18) + fact_size + 8 + data_size);
    out += "WAVE";
    out += "fmt ";
    append_u32(out, 18);
    append_u16(out, is_float ? 3 : 1);
    append_u16(out, 2);
    append_u32(out, rate);
    append_u32(out, rate * block_align);
    append_u16(out, block_align);
    append_u16(out, static_cast<std::uint16_t>(bits));
    append_u16(out, 0); // cbSize
    if (is_float) {
        out += "fact";
        append_u32(out, 4);
        append_u32(out, static_cast<std::uint32_t>(signal.frames()));
    }
    out += "data";
    append_u32(out, data_size);

    const double full_scale = std::ldexp(1.0, bits - 1);
    const double max_int = full_scale - 1.0;
    for (std::size_t f = 0; f < signal.frames(); ++f) {
        for (int ch = 0; ch < 2; ++ch) {
            double v = (ch == 0 ? signal.left : signal.right)[f];
            if (is_float) {
                float fv = static_cast<float>(v);
                std::uint32_t raw;
                std::memcpy(&raw, &fv, 4);
                append_u32(out, raw);
            } else {
                double scaled = std::clamp(std::round(v * full_scale), -full_scale, max_int);
                std::int32_t iv = static_cast<std::int32_t>(scaled);
                if (bits == 16) {
                    append_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(iv)));
                } else if (bits == 24) {
                    out.push_back(static_cast<char>(iv & 0xff));
                    out.push_back(static_cast<char>((iv >> 8) & 0xff));
                    out.push_back(static_cast<char>((iv >> 16) & 0xff));
                } else {
                    append_u32(out, static_cast<std::uint32_t>(iv));
                }
            }
        }
    }

    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write WAV file " + path.string());
    }
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) {
        throw std::runtime_error("short write to " + path.string());
    }
}

StereoSegment extract_middle_segment(const StereoSignal& signal, double duration) {
    if (signal.frames() == 0) {
        throw std::invalid_argument("extract_middle_segment: empty signal");
    }
    if (duration <= 0) {
        throw std::invalid_argument("extract_middle_segment: duration must be positive");
    }
    const std::size_t total = signal.frames();
    const std::size_t want = static_cast<std::size_t>(std::llround(duration * signal.sample_rate));

    StereoSegment segment;
    segment.sample_rate = signal.sample_rate;
    if (total <= want) {
        segment.left = signal.left;
        segment.right = signal.right;
        segment.source_offset = 0.0;
        segment.truncated = total < want;
        return segment;
    }
    const std::size_t start = (total - want) / 2;
    segment.left.assign(signal.left.begin() + start, signal.left.begin() + start + want);
    segment.right.assign(signal.right.begin() + start, signal.right.begin() + start + want);
    segment.source_offset = static_cast<double>(start) / signal.sample_rate;
    segment.truncated = false;
    return segment;
}

} // namespace soundmap
