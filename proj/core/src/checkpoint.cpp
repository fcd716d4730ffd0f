#include "ckt/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ckt/errors.hpp"

namespace ckt {

namespace {

constexpr char kMagic[4] = {'C', 'K', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
    T value;
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw ParseError(path + ": truncated checkpoint");
    return value;
}

}  // namespace

const Tensor& Checkpoint::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return e.tensor;
    }
    throw LookupError("checkpoint: missing parameter '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ValidationError("checkpoint: cannot open '" + tmp + "' for writing");
        os.write(kMagic, sizeof(kMagic));
        write_pod<std::uint32_t>(os, kVersion);
        write_pod<std::uint64_t>(os, ckpt.metadata_json.size());
        os.write(ckpt.metadata_json.data(),
                 static_cast<std::streamsize>(ckpt.metadata_json.size()));
        write_pod<std::uint64_t>(os, ckpt.entries.size());
        for (const auto& entry : ckpt.entries) {
            write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(entry.name.size()));
            os.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
            const auto& shape = entry.tensor.shape();
            write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
            for (auto d : shape) write_pod<std::uint64_t>(os, d);
            const auto values = entry.tensor.values();
            os.write(reinterpret_cast<const char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(double)));
        }
        if (!os) throw ValidationError("checkpoint: write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ValidationError("checkpoint: cannot rename '" + tmp + "' to '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError(path + ": not a CKTC checkpoint");
    }
    const auto version = read_pod<std::uint32_t>(is, path);
    if (version != kVersion) {
        throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ckpt;
    const auto meta_len = read_pod<std::uint64_t>(is, path);
    ckpt.metadata_json.resize(meta_len);
    is.read(ckpt.metadata_json.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw ParseError(path + ": truncated checkpoint metadata");
    const auto n_entries = read_pod<std::uint64_t>(is, path);
    ckpt.entries.reserve(n_entries);
    for (std::uint64_t e = 0; e < n_entries; ++e) {
        const auto name_len = read_pod<std::uint32_t>(is, path);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw ParseError(path + ": truncated entry name");
        const auto ndim = read_pod<std::uint32_t>(is, path);
        std::vector<std::size_t> shape(ndim);
        std::size_t count = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(read_pod<std::uint64_t>(is, path));
            count *= d;
        }
        std::vector<double> values(count);
        is.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!is) throw ParseError(path + ": truncated values for '" + name + "'");
        ckpt.entries.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
    }
    return ckpt;
}

}  // namespace ckt
