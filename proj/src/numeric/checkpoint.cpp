#include "v2l/numeric/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "v2l/io.hpp"

namespace v2l::numeric {

namespace {

void append_le_float(std::string& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float read_le_float(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& stem) {
    auto p = stem;
    p += ".json";
    return p;
}

std::filesystem::path blob_path(const std::filesystem::path& stem) {
    auto p = stem;
    p += ".bin";
    return p;
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].name == name) return tensors[i];
    throw DataError("checkpoint has no tensor '" + name + "'");
}

template <class Real>
void save_checkpoint(const std::filesystem::path& stem, const std::string& kind,
                     std::span<const NamedTensor<Real>> tensors, const nlohmann::json& meta) {
    std::string blob;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& t : tensors) {
        entries.push_back({{"name", t.name},
                           {"rows", t.value->rows()},
                           {"cols", t.value->cols()},
                           {"offset", blob.size()}});
        for (Real x : t.value->flat()) append_le_float(blob, static_cast<float>(x));
    }
    nlohmann::json manifest = {{"version", kFormatVersion},
                               {"kind", kind},
                               {"blob", blob_path(stem).filename().string()},
                               {"tensors", entries},
                               {"meta", meta}};
    io::write_file_atomic(blob_path(stem), blob);
    io::write_file_atomic(manifest_path(stem), io::dump_document(manifest));
}

Checkpoint load_checkpoint(const std::filesystem::path& stem, const std::string& expected_kind) {
    const auto manifest = io::load_versioned(manifest_path(stem), "checkpoint manifest");
    Checkpoint ckpt;
    ckpt.kind = manifest.value("kind", "");
    if (!expected_kind.empty() && ckpt.kind != expected_kind)
        throw DataError("checkpoint '" + stem.string() + "' is a '" + ckpt.kind + "' model, expected '" +
                        expected_kind + "'");
    ckpt.meta = manifest.value("meta", nlohmann::json::object());
    const auto blob_file = manifest_path(stem).parent_path() / manifest.at("blob").get<std::string>();
    const std::string blob = io::read_file(blob_file);
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
    for (const auto& e : manifest.at("tensors")) {
        CheckpointEntry entry{e.at("name").get<std::string>(), e.at("rows").get<std::size_t>(),
                              e.at("cols").get<std::size_t>(), e.at("offset").get<std::size_t>()};
        const std::size_t n = entry.rows * entry.cols;
        if (entry.offset + 4 * n > blob.size())
            throw DataError("checkpoint blob too short for tensor '" + entry.name + "'");
        Matrix m(entry.rows, entry.cols);
        for (std::size_t i = 0; i < n; ++i) m.flat()[i] = read_le_float(bytes + entry.offset + 4 * i);
        ckpt.entries.push_back(std::move(entry));
        ckpt.tensors.push_back(std::move(m));
    }
    return ckpt;
}

template <class Real>
void restore_tensors(const Checkpoint& ckpt, std::span<const NamedTensor<Real>> tensors) {
    if (ckpt.entries.size() != tensors.size())
        throw DataError("checkpoint holds " + std::to_string(ckpt.entries.size()) + " tensors, model expects " +
                        std::to_string(tensors.size()));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& src = ckpt.tensors[i];
        auto& dst = *tensors[i].value;
        if (ckpt.entries[i].name != tensors[i].name)
            throw DataError("checkpoint tensor " + std::to_string(i) + " is '" + ckpt.entries[i].name +
                            "', expected '" + tensors[i].name + "'");
        if (src.rows() != dst.rows() || src.cols() != dst.cols())
            throw ShapeError("checkpoint tensor '" + tensors[i].name + "' has shape " +
                             shape_string(src.rows(), src.cols()) + ", expected " +
                             shape_string(dst.rows(), dst.cols()));
        for (std::size_t j = 0; j < src.size(); ++j) dst.flat()[j] = static_cast<Real>(src.flat()[j]);
    }
}

template void save_checkpoint<float>(const std::filesystem::path&, const std::string&,
                                     std::span<const NamedTensor<float>>, const nlohmann::json&);
template void save_checkpoint<double>(const std::filesystem::path&, const std::string&,
                                      std::span<const NamedTensor<double>>, const nlohmann::json&);
template void restore_tensors<float>(const Checkpoint&, std::span<const NamedTensor<float>>);
template void restore_tensors<double>(const Checkpoint&, std::span<const NamedTensor<double>>);

}  // namespace v2l::numeric
