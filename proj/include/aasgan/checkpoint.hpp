#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "aasgan/common.hpp"
#include "aasgan/tensor.hpp"

namespace aasgan::ckpt {

constexpr char kMagic[8] = {'A', 'A', 'S', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_str(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError("checkpoint: truncated (u32)");
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError("checkpoint: truncated (u64)");
    return v;
}

inline std::string read_str(std::istream& is) {
    const std::uint32_t len = read_u32(is);
    if (len > (1u << 20)) throw FormatError("checkpoint: implausible string length");
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw FormatError("checkpoint: truncated (string)");
    return s;
}

inline void write_tensor(std::ostream& os, const Tensor& t) {
    write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_u64(os, static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(t.v.data()),
             static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

inline Tensor read_tensor(std::istream& is) {
    const std::uint32_t ndim = read_u32(is);
    if (ndim > 8) throw FormatError("checkpoint: implausible tensor rank");
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        shape[i] = static_cast<std::size_t>(read_u64(is));
        count *= shape[i];
    }
    if (count > (std::size_t{1} << 28)) throw FormatError("checkpoint: implausible tensor size");
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw FormatError("checkpoint: truncated (tensor data)");
    return t;
}

}  // namespace detail

// A named list of named tensors; one section per model or optimizer state.
struct Section {
    std::string name;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void add(std::string tname, Tensor t) { tensors.emplace_back(std::move(tname), std::move(t)); }

    const Tensor& get(const std::string& tname) const {
        for (const auto& [n, t] : tensors)
            if (n == tname) return t;
        throw FormatError("checkpoint section '" + name + "': missing tensor '" + tname + "'");
    }
};

struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> meta;  // insertion-ordered key=value
    std::vector<Section> sections;

    void set_meta(const std::string& key, const std::string& value) {
        for (auto& [k, v] : meta)
            if (k == key) {
                v = value;
                return;
            }
        meta.emplace_back(key, value);
    }

    bool has_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return true;
        return false;
    }

    const std::string& get_meta(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        throw FormatError("checkpoint: missing meta key '" + key + "'");
    }

    Section& add_section(const std::string& name) {
        sections.push_back(Section{name, {}});
        return sections.back();
    }

    bool has_section(const std::string& name) const {
        for (const Section& s : sections)
            if (s.name == name) return true;
        return false;
    }

    const Section& get_section(const std::string& name) const {
        for (const Section& s : sections)
            if (s.name == name) return s;
        throw FormatError("checkpoint: missing section '" + name + "'");
    }

    void save(std::ostream& os) const {
        os.write(kMagic, sizeof(kMagic));
        detail::write_u32(os, kVersion);
        detail::write_u32(os, static_cast<std::uint32_t>(meta.size()));
        for (const auto& [k, v] : meta) {
            detail::write_str(os, k);
            detail::write_str(os, v);
        }
        detail::write_u32(os, static_cast<std::uint32_t>(sections.size()));
        for (const Section& s : sections) {
            detail::write_str(os, s.name);
            detail::write_u32(os, static_cast<std::uint32_t>(s.tensors.size()));
            for (const auto& [n, t] : s.tensors) {
                detail::write_str(os, n);
                detail::write_tensor(os, t);
            }
        }
        if (!os) throw IoError("checkpoint: write failed");
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
        save(os);
        os.flush();
        if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
    }

    static Checkpoint load(std::istream& is) {
        char magic[sizeof(kMagic)] = {};
        is.read(magic, sizeof(magic));
        if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
            throw FormatError("checkpoint: bad magic");
        const std::uint32_t version = detail::read_u32(is);
        if (version != kVersion)
            throw FormatError("checkpoint: unsupported version " + std::to_string(version));
        Checkpoint c;
        const std::uint32_t n_meta = detail::read_u32(is);
        for (std::uint32_t i = 0; i < n_meta; ++i) {
            std::string k = detail::read_str(is);
            std::string v = detail::read_str(is);
            c.meta.emplace_back(std::move(k), std::move(v));
        }
        const std::uint32_t n_sections = detail::read_u32(is);
        for (std::uint32_t i = 0; i < n_sections; ++i) {
            Section s;
            s.name = detail::read_str(is);
            const std::uint32_t n_tensors = detail::read_u32(is);
            for (std::uint32_t j = 0; j < n_tensors; ++j) {
                std::string tn = detail::read_str(is);
                Tensor t = detail::read_tensor(is);
                s.tensors.emplace_back(std::move(tn), std::move(t));
            }
            c.sections.push_back(std::move(s));
        }
        return c;
    }

    static Checkpoint load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
        return load(is);
    }
};

// ---------------------------------------------------------------- ParamStore bridge

inline Section dump_params(const std::string& name, const ParamStore& ps) {
    Section s;
    s.name = name;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Param& p = ps.at(i);
        s.add(p.name, p.value);
    }
    return s;
}

inline void load_params(ParamStore& ps, const Section& s) {
    if (s.tensors.size() != ps.size())
        throw FormatError("checkpoint section '" + s.name + "': has " +
                          std::to_string(s.tensors.size()) + " tensors, model expects " +
                          std::to_string(ps.size()));
    for (const auto& [n, t] : s.tensors) {
        Param& p = ps.get(n);
        if (p.value.shape != t.shape)
            throw FormatError("checkpoint section '" + s.name + "': tensor '" + n + "' is " +
                              t.shape_str() + ", model expects " + p.value.shape_str());
        p.value = t;
    }
}

}  // namespace aasgan::ckpt
