#include "cfnn/serialize.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cfnn {

namespace {

constexpr const char* kMagic = "CFNN1";

void append_double_le(std::string& buf, double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double read_double_le(const std::string& buf, size_t off) {
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<uint64_t>(static_cast<unsigned char>(buf[off + i]))
                << (8 * i);
    return std::bit_cast<double>(bits);
}

void append_store_header(std::ostringstream& h, const ParamStore& store) {
    h << "store " << store.names.size() << ' ' << store.values.size() << '\n';
    for (const auto& r : store.names)
        h << "range " << r.name << ' ' << r.offset << ' ' << r.len << '\n';
}

uint32_t payload_crc(const std::string& buf, size_t len) {
    return static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(len)));
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    const ModelConfig& cfg = model.config;
    std::ostringstream h;
    h.precision(17);
    h << kMagic << '\n';
    h << "family " << family_name(cfg.family) << '\n';
    h << "input_dim " << cfg.input_dim << '\n';
    h << "depth " << cfg.depth << '\n';
    h << "poly_degree " << cfg.poly_degree << '\n';
    h << "unit_count " << cfg.unit_count << '\n';
    h << "latent_dim " << cfg.latent_dim << '\n';
    h << "gamma " << cfg.gamma << '\n';
    h << "shrinkage " << cfg.shrinkage << '\n';
    h << "epsilon_den " << cfg.epsilon_den << '\n';
    h << "epsilon_gate " << cfg.epsilon_gate << '\n';
    h << "hidden_widths " << cfg.hidden_widths.size();
    for (int w : cfg.hidden_widths) h << ' ' << w;
    h << '\n';

    if (cfg.family == Family::Boost) {
        h << "stores " << model.boost_stages.size() << '\n';
        for (const auto& stage : model.boost_stages) append_store_header(h, stage);
    } else {
        h << "stores 1\n";
        append_store_header(h, model.params);
    }
    h << "end_header\n";

    std::string buf = h.str();
    if (cfg.family == Family::Boost) {
        append_double_le(buf, model.boost_f0);
        for (const auto& stage : model.boost_stages)
            for (double v : stage.values) append_double_le(buf, v);
    } else {
        for (double v : model.params.values) append_double_le(buf, v);
    }

    uint32_t crc = payload_crc(buf, buf.size());
    for (int i = 0; i < 4; ++i)
        buf.push_back(static_cast<char>((crc >> (8 * i)) & 0xFF));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

    if (buf.size() < std::strlen(kMagic) + 1 + 4)
        throw ChecksumError("file too short: " + path);

    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
        stored |= static_cast<uint32_t>(
                      static_cast<unsigned char>(buf[buf.size() - 4 + i]))
                  << (8 * i);
    if (payload_crc(buf, buf.size() - 4) != stored)
        throw ChecksumError("CRC32 mismatch in " + path);

    std::istringstream h(buf);
    std::string line;
    std::getline(h, line);
    if (line != kMagic)
        throw FormatError("bad magic (expected \"CFNN1\") in " + path);

    Model model;
    ModelConfig& cfg = model.config;
    std::vector<ParamStore> stores;
    size_t n_stores = 0;

    auto fail = [&](const std::string& what) -> FormatError {
        return FormatError("malformed header (" + what + ") in " + path);
    };

    while (std::getline(h, line) && line != "end_header") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "family") {
            std::string v;
            ls >> v;
            cfg.family = family_from_name(v);
        } else if (key == "input_dim") {
            ls >> cfg.input_dim;
        } else if (key == "depth") {
            ls >> cfg.depth;
        } else if (key == "poly_degree") {
            ls >> cfg.poly_degree;
        } else if (key == "unit_count") {
            ls >> cfg.unit_count;
        } else if (key == "latent_dim") {
            ls >> cfg.latent_dim;
        } else if (key == "gamma") {
            ls >> cfg.gamma;
        } else if (key == "shrinkage") {
            ls >> cfg.shrinkage;
        } else if (key == "epsilon_den") {
            ls >> cfg.epsilon_den;
        } else if (key == "epsilon_gate") {
            ls >> cfg.epsilon_gate;
        } else if (key == "hidden_widths") {
            size_t k = 0;
            ls >> k;
            cfg.hidden_widths.resize(k);
            for (size_t i = 0; i < k; ++i) ls >> cfg.hidden_widths[i];
        } else if (key == "stores") {
            ls >> n_stores;
        } else if (key == "store") {
            ParamStore store;
            size_t nr = 0, nv = 0;
            ls >> nr >> nv;
            if (!ls) throw fail("store line");
            for (size_t i = 0; i < nr; ++i) {
                if (!std::getline(h, line)) throw fail("range table");
                std::istringstream rs(line);
                std::string tag;
                NamedRange r;
                rs >> tag >> r.name >> r.offset >> r.len;
                if (!rs || tag != "range") throw fail("range line");
                store.names.push_back(r);
            }
            store.values.resize(nv, 0.0);
            stores.push_back(std::move(store));
        } else {
            throw fail("unknown key " + key);
        }
        if (ls.fail()) throw fail("key " + key);
    }
    if (line != "end_header") throw fail("missing end_header");
    if (stores.size() != n_stores) throw fail("store count");

    size_t off = static_cast<size_t>(h.tellg());
    size_t need = 0;
    for (const auto& s : stores) need += s.values.size();
    if (cfg.family == Family::Boost) need += 1;
    if (buf.size() - 4 - off != need * 8) throw fail("payload size");

    if (cfg.family == Family::Boost) {
        model.boost_f0 = read_double_le(buf, off);
        off += 8;
        model.boost_stages = std::move(stores);
        for (auto& stage : model.boost_stages)
            for (double& v : stage.values) {
                v = read_double_le(buf, off);
                off += 8;
            }
    } else {
        if (stores.size() != 1) throw fail("store count for family");
        model.params = std::move(stores[0]);
        for (double& v : model.params.values) {
            v = read_double_le(buf, off);
            off += 8;
        }
    }
    return model;
}

}  // namespace cfnn
