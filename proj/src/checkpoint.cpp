#include "dfka/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dfka {

namespace {

std::uint64_t blob_hash(const std::vector<char>& blob) {
    return fnv1a(std::string_view(blob.data(), blob.size()));
}

std::string shape_token(const Shape& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out;
}

}  // namespace

void save_checkpoint(const NamedParams& params, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::vector<char> blob;
    std::ostringstream manifest;
    std::uint64_t offset = 0;
    for (const auto& [name, t] : params) {
        const auto d = t.data();
        const std::uint64_t bytes = d.size() * sizeof(float);
        const size_t old = blob.size();
        blob.resize(old + bytes);
        std::memcpy(blob.data() + old, d.data(), bytes);
        manifest << name << " " << shape_token(t.shape()) << " " << offset << " " << bytes << "\n";
        offset += bytes;
    }

    std::ofstream bin(fs::path(dir) / "params.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("save_checkpoint: cannot write params.bin under " + dir);
    bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    bin.close();

    std::ofstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("save_checkpoint: cannot write manifest.txt under " + dir);
    mf << "dfka-checkpoint v1\n";
    mf << "count " << params.size() << "\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(blob_hash(blob)));
    mf << "blobhash " << hex << "\n";
    mf << manifest.str();
}

void load_checkpoint(const NamedParams& params, const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("load_checkpoint: cannot open manifest.txt under " + dir);

    std::string line;
    if (!std::getline(mf, line) || line != "dfka-checkpoint v1")
        throw std::runtime_error("load_checkpoint: bad manifest header: '" + line + "'");
    size_t count = 0;
    {
        std::string tag;
        if (!(mf >> tag >> count) || tag != "count")
            throw std::runtime_error("load_checkpoint: missing count line");
    }
    std::string hash_hex;
    {
        std::string tag;
        if (!(mf >> tag >> hash_hex) || tag != "blobhash")
            throw std::runtime_error("load_checkpoint: missing blobhash line");
    }

    struct Entry {
        std::string shape;
        std::uint64_t offset = 0, bytes = 0;
    };
    std::unordered_map<std::string, Entry> entries;
    std::vector<std::string> order;
    std::uint64_t expect_offset = 0;
    for (size_t i = 0; i < count; ++i) {
        std::string name;
        Entry e;
        if (!(mf >> name >> e.shape >> e.offset >> e.bytes))
            throw std::runtime_error("load_checkpoint: manifest truncated at entry " + std::to_string(i));
        if (e.offset != expect_offset)
            throw std::runtime_error("load_checkpoint: non-sequential offset for parameter '" + name + "'");
        expect_offset += e.bytes;
        if (!entries.emplace(name, e).second)
            throw std::runtime_error("load_checkpoint: duplicate parameter '" + name + "'");
        order.push_back(name);
    }

    std::ifstream bin(fs::path(dir) / "params.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("load_checkpoint: cannot open params.bin under " + dir);
    std::vector<char> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    if (blob.size() != expect_offset)
        throw std::runtime_error("load_checkpoint: blob is " + std::to_string(blob.size()) +
                                 " bytes, manifest expects " + std::to_string(expect_offset));
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(blob_hash(blob)));
    if (hash_hex != hex)
        throw std::runtime_error("load_checkpoint: blob hash mismatch (manifest " + hash_hex + ", blob " +
                                 hex + ")");

    // The parameter sets must agree exactly.
    if (params.size() != count) {
        std::string missing;
        std::unordered_map<std::string, bool> have;
        for (const auto& [name, t] : params) have[name] = true;
        for (const auto& name : order)
            if (!have.count(name)) missing += (missing.empty() ? "" : ", ") + name;
        throw std::runtime_error("load_checkpoint: network has " + std::to_string(params.size()) +
                                 " parameters, checkpoint has " + std::to_string(count) +
                                 (missing.empty() ? "" : "; checkpoint-only: " + missing));
    }
    for (const auto& [name, t] : params) {
        auto it = entries.find(name);
        if (it == entries.end())
            throw std::runtime_error("load_checkpoint: network parameter '" + name +
                                     "' not present in checkpoint");
        const Entry& e = it->second;
        if (e.shape != shape_token(t.shape()))
            throw std::runtime_error("load_checkpoint: shape mismatch for '" + name + "': checkpoint " +
                                     e.shape + " vs network " + shape_token(t.shape()));
        if (e.bytes != t.data().size() * sizeof(float))
            throw std::runtime_error("load_checkpoint: byte-count mismatch for '" + name + "'");
        Tensor mut = t;  // handle copy, shares storage
        std::memcpy(mut.data().data(), blob.data() + e.offset, e.bytes);
    }
}

}  // namespace dfka
