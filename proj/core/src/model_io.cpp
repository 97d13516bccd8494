/*
 * Copyright (C) 2026 The ctavatar authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "ctav/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "container writer assumes a little-endian host");

namespace ctav {

namespace {

constexpr char kMagic[5] = {'C', 'T', 'A', 'V', '1'};
constexpr size_t kNameLen = 12;

struct SectionBlob {
    std::string name;
    std::vector<std::uint8_t> bytes;
    std::uint64_t payload = 0;
};

class Writer {
public:
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f32(float v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void raw(const void* p, size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    void f32_array(const double* src, size_t n) {
        const size_t at = buf.size();
        buf.resize(at + n * 4);
        auto* dst = reinterpret_cast<float*>(buf.data() + at);
        for (size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(src[i]);
    }
    void f16_array(const double* src, size_t n) {
        const size_t at = buf.size();
        buf.resize(at + n * 2);
        auto* dst = reinterpret_cast<std::uint16_t*>(buf.data() + at);
        for (size_t i = 0; i < n; ++i) {
            dst[i] = float_to_half(static_cast<float>(src[i]));
        }
    }
};

class Reader {
public:
    Reader(const std::uint8_t* data, size_t n) : data_(data), size_(n) {}

    std::uint8_t u8() { return *take(1); }
    std::uint16_t u16() { return scalar<std::uint16_t>(); }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    std::int32_t i32() { return scalar<std::int32_t>(); }
    float f32() { return scalar<float>(); }
    double f64() { return scalar<double>(); }

    void f32_array(double* dst, size_t n) {
        const std::uint8_t* p = take(n * 4);
        for (size_t i = 0; i < n; ++i) {
            float v;
            std::memcpy(&v, p + 4 * i, 4);
            dst[i] = static_cast<double>(v);
        }
    }
    void f16_array(double* dst, size_t n) {
        const std::uint8_t* p = take(n * 2);
        for (size_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, p + 2 * i, 2);
            dst[i] = static_cast<double>(half_to_float(v));
        }
    }
    const std::uint8_t* take(size_t n) {
        if (pos_ + n > size_) throw CorruptFile("section shorter than declared");
        const std::uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }
    size_t remaining() const { return size_ - pos_; }

private:
    template <class T>
    T scalar() {
        T v;
        std::memcpy(&v, take(sizeof(T)), sizeof(T));
        return v;
    }
    const std::uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

SectionBlob make_config_section(const AvatarModel& m) {
    SectionBlob s;
    s.name = "config";
    const std::string text = m.config.dump();
    s.bytes.assign(text.begin(), text.end());
    s.payload = s.bytes.size();
    return s;
}

SectionBlob make_rig_section(const AvatarModel& m) {
    SectionBlob s;
    s.name = "rig";
    std::ostringstream os;
    os << "seed=" << m.rig.seed << "\n";
    os << "rings=" << m.rig.config.rings << "\n";
    os << "segments=" << m.rig.config.segments << "\n";
    os << "blendshapes=" << m.rig.config.n_blendshapes << "\n";
    os << "vertices=" << m.rig.vertex_count() << "\n";
    os << "faces=" << m.rig.face_count() << "\n";
    const std::string text = os.str();
    s.bytes.assign(text.begin(), text.end());
    s.payload = s.bytes.size();
    return s;
}

SectionBlob make_splats_section(const AvatarModel& m) {
    SectionBlob s;
    s.name = "splats";
    Writer w;
    const SplatSet& sp = m.splats;
    const size_t n = static_cast<size_t>(sp.count());
    w.u32(static_cast<std::uint32_t>(n));
    w.f32_array(sp.mu_local.data(), 3 * n);
    w.f32_array(sp.quat_raw.data(), 4 * n);
    w.f32_array(sp.log_scale.data(), 3 * n);
    w.f32_array(sp.alpha_logit.data(), n);
    for (int f : sp.face_id) w.i32(f);
    s.payload = n * (11 * 4 + 4);
    s.bytes = std::move(w.buf);
    return s;
}

void write_bbox(Writer& w, const Bbox& bb) {
    for (int a = 0; a < 3; ++a) w.f64(bb.min[a]);
    for (int a = 0; a < 3; ++a) w.f64(bb.max[a]);
}

Bbox read_bbox(Reader& r) {
    Bbox bb;
    for (int a = 0; a < 3; ++a) bb.min[a] = r.f64();
    for (int a = 0; a < 3; ++a) bb.max[a] = r.f64();
    return bb;
}

SectionBlob make_triplane_section(const AvatarModel& m, SavePrecision prec) {
    SectionBlob s;
    s.name = "triplane";
    Writer w;
    const Triplane& tp = m.triplane;
    const bool half = prec == SavePrecision::Fp16Grids;
    w.u32(static_cast<std::uint32_t>(tp.resolution()));
    w.u32(static_cast<std::uint32_t>(tp.xy.channels));
    w.u32(static_cast<std::uint32_t>(tp.xz.channels));
    w.u32(static_cast<std::uint32_t>(tp.yz.channels));
    w.u8(half ? 1 : 0);
    write_bbox(w, tp.bounds);
    const size_t header = w.buf.size();
    for (const auto* g : {&tp.xy, &tp.xz, &tp.yz}) {
        if (half) {
            w.f16_array(g->data.data(), g->data.size());
        } else {
            w.f32_array(g->data.data(), g->data.size());
        }
    }
    s.payload = w.buf.size() - header;
    s.bytes = std::move(w.buf);
    return s;
}

SectionBlob make_lines_section(const AvatarModel& m, SavePrecision prec) {
    SectionBlob s;
    s.name = "lines";
    Writer w;
    const FeatureLineBank& bank = m.lines;
    const bool half = prec == SavePrecision::Fp16Grids;
    w.u32(static_cast<std::uint32_t>(bank.expression_count()));
    w.u32(static_cast<std::uint32_t>(bank.jaw_count()));
    w.u32(static_cast<std::uint32_t>(bank.line_resolution()));
    w.u32(static_cast<std::uint32_t>(bank.channels()));
    w.u8(half ? 1 : 0);
    if (!bank.empty()) write_bbox(w, bank.bounds());
    for (const auto& q : bank.jaw_basis) {
        w.f64(q.w);
        w.f64(q.x);
        w.f64(q.y);
        w.f64(q.z);
    }
    const size_t header = w.buf.size();
    auto write_triple = [&](const FeatureLineTriple& t) {
        for (const auto* g : {&t.x, &t.y, &t.z}) {
            if (half) {
                w.f16_array(g->data.data(), g->data.size());
            } else {
                w.f32_array(g->data.data(), g->data.size());
            }
        }
    };
    for (const auto& t : bank.expression) write_triple(t);
    for (const auto& t : bank.jaw) write_triple(t);
    s.payload = w.buf.size() - header;
    s.bytes = std::move(w.buf);
    return s;
}

SectionBlob make_mlp_section(const MlpParams& mlp, const std::string& name) {
    SectionBlob s;
    s.name = name;
    Writer w;
    w.u8(static_cast<std::uint8_t>(mlp.head));
    w.u32(static_cast<std::uint32_t>(mlp.layers.size()));
    const size_t header_base = w.buf.size();
    size_t dims_bytes = 0;
    for (const auto& l : mlp.layers) {
        w.u32(static_cast<std::uint32_t>(l.W.rows()));
        w.u32(static_cast<std::uint32_t>(l.W.cols()));
        dims_bytes += 8;
        // Row-major weight order.
        for (int r = 0; r < l.W.rows(); ++r) {
            for (int c = 0; c < l.W.cols(); ++c) w.f32(static_cast<float>(l.W(r, c)));
        }
        for (int r = 0; r < l.b.size(); ++r) w.f32(static_cast<float>(l.b[r]));
    }
    s.payload = w.buf.size() - header_base - dims_bytes;
    s.bytes = std::move(w.buf);
    return s;
}

void parse_splats_section(Reader& r, SplatSet& sp) {
    const size_t n = r.u32();
    if (n > (1u << 26)) throw CorruptFile("implausible splat count");
    sp.resize(static_cast<int>(n));
    r.f32_array(sp.mu_local.data(), 3 * n);
    r.f32_array(sp.quat_raw.data(), 4 * n);
    r.f32_array(sp.log_scale.data(), 3 * n);
    r.f32_array(sp.alpha_logit.data(), n);
    for (size_t i = 0; i < n; ++i) sp.face_id[i] = r.i32();
}

Triplane parse_triplane_section(Reader& r) {
    const int res = static_cast<int>(r.u32());
    const int cxy = static_cast<int>(r.u32());
    const int cxz = static_cast<int>(r.u32());
    const int cyz = static_cast<int>(r.u32());
    const std::uint8_t dtype = r.u8();
    if (cxz != cyz) throw CorruptFile("triplane side channels disagree");
    const Bbox bb = read_bbox(r);
    Triplane tp(res, cxy, cxz, bb);
    for (auto* g : {&tp.xy, &tp.xz, &tp.yz}) {
        if (dtype == 1) {
            r.f16_array(g->data.data(), g->data.size());
        } else if (dtype == 0) {
            r.f32_array(g->data.data(), g->data.size());
        } else {
            throw CorruptFile("unknown grid dtype");
        }
    }
    return tp;
}

FeatureLineBank parse_lines_section(Reader& r) {
    FeatureLineBank bank;
    const int n_b = static_cast<int>(r.u32());
    const int n_j = static_cast<int>(r.u32());
    const int n_s = static_cast<int>(r.u32());
    const int n_d2 = static_cast<int>(r.u32());
    const std::uint8_t dtype = r.u8();
    if (n_b == 0 && n_j == 0) return bank;
    const Bbox bb = read_bbox(r);
    for (int k = 0; k < n_j; ++k) {
        const double w = r.f64(), x = r.f64(), y = r.f64(), z = r.f64();
        bank.jaw_basis.push_back(UnitQuaternion::normalized(w, x, y, z));
    }
    auto read_triple = [&]() {
        FeatureLineTriple t(n_s, n_d2, bb);
        for (auto* g : {&t.x, &t.y, &t.z}) {
            if (dtype == 1) {
                r.f16_array(g->data.data(), g->data.size());
            } else if (dtype == 0) {
                r.f32_array(g->data.data(), g->data.size());
            } else {
                throw CorruptFile("unknown grid dtype");
            }
        }
        return t;
    };
    for (int i = 0; i < n_b; ++i) bank.expression.push_back(read_triple());
    for (int k = 0; k < n_j; ++k) bank.jaw.push_back(read_triple());
    return bank;
}

MlpParams parse_mlp_section(Reader& r) {
    MlpParams mlp;
    const std::uint8_t head = r.u8();
    if (head > 2) throw CorruptFile("unknown mlp head activation");
    mlp.head = static_cast<HeadActivation>(head);
    const int layers = static_cast<int>(r.u32());
    if (layers > 64) throw CorruptFile("implausible layer count");
    for (int l = 0; l < layers; ++l) {
        const int rows = static_cast<int>(r.u32());
        const int cols = static_cast<int>(r.u32());
        if (rows <= 0 || cols <= 0 || rows > 65536 || cols > 65536) {
            throw CorruptFile("implausible mlp layer shape");
        }
        MlpParams::Layer layer;
        layer.W.resize(rows, cols);
        for (int rr = 0; rr < rows; ++rr) {
            for (int cc = 0; cc < cols; ++cc) {
                layer.W(rr, cc) = static_cast<double>(r.f32());
            }
        }
        layer.b.resize(rows);
        for (int rr = 0; rr < rows; ++rr) layer.b[rr] = static_cast<double>(r.f32());
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw IoFailure("cannot open model file: " + path);
    const std::streamsize size = is.tellg();
    is.seekg(0);
    std::vector<std::uint8_t> buf(static_cast<size_t>(size));
    is.read(reinterpret_cast<char*>(buf.data()), size);
    if (!is) throw IoFailure("failed reading model file: " + path);
    return buf;
}

struct TableEntry {
    std::string name;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

std::vector<TableEntry> parse_table(const std::vector<std::uint8_t>& buf,
                                    std::uint64_t* header_bytes) {
    if (buf.size() < sizeof(kMagic)) throw VersionMismatch("file too short for magic");
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw VersionMismatch("not a CTAV1 container");
    }
    Reader r(buf.data() + sizeof(kMagic), buf.size() - sizeof(kMagic));
    try {
        r.u8();  // flags
        const int count = r.u16();
        std::vector<TableEntry> table;
        for (int i = 0; i < count; ++i) {
            TableEntry e;
            const std::uint8_t* name = r.take(kNameLen);
            size_t len = 0;
            while (len < kNameLen && name[len] != 0) ++len;
            e.name.assign(reinterpret_cast<const char*>(name), len);
            e.offset = r.u64();
            e.length = r.u64();
            if (e.offset + e.length > buf.size() || e.offset + e.length < e.offset) {
                throw CorruptFile("section extends past end of file: " + e.name);
            }
            table.push_back(std::move(e));
        }
        if (header_bytes) {
            *header_bytes = sizeof(kMagic) + 1 + 2 + static_cast<std::uint64_t>(count) * (kNameLen + 16);
        }
        return table;
    } catch (const CorruptFile&) {
        throw;
    } catch (const Error&) {
        throw CorruptFile("truncated section table");
    }
}

}  // namespace

const StorageSection* StorageReport::find(const std::string& name) const {
    for (const auto& s : sections) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

StorageReport save_model(const AvatarModel& model, const std::string& path,
                         SavePrecision precision) {
    model.splats.validate(model.rig.face_count());

    std::vector<SectionBlob> sections;
    sections.push_back(make_config_section(model));
    sections.push_back(make_rig_section(model));
    sections.push_back(make_splats_section(model));
    sections.push_back(make_triplane_section(model, precision));
    sections.push_back(make_lines_section(model, precision));
    sections.push_back(make_mlp_section(model.color_mlp, "mlp_color"));
    sections.push_back(make_mlp_section(model.opacity_mlp, "mlp_opacity"));

    Writer header;
    header.raw(kMagic, sizeof(kMagic));
    header.u8(0);  // flags
    header.u16(static_cast<std::uint16_t>(sections.size()));
    std::uint64_t offset =
        sizeof(kMagic) + 1 + 2 + sections.size() * (kNameLen + 16);
    StorageReport report;
    report.header_bytes = offset;
    for (const auto& s : sections) {
        char name[kNameLen] = {};
        std::memcpy(name, s.name.data(), std::min(s.name.size(), kNameLen));
        header.raw(name, kNameLen);
        header.u64(offset);
        header.u64(s.bytes.size());
        report.sections.push_back({s.name, s.bytes.size(), s.payload});
        report.total_bytes += s.bytes.size();
        offset += s.bytes.size();
    }
    report.file_bytes = report.header_bytes + report.total_bytes;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open model file for writing: " + path);
    os.write(reinterpret_cast<const char*>(header.buf.data()),
             static_cast<std::streamsize>(header.buf.size()));
    for (const auto& s : sections) {
        os.write(reinterpret_cast<const char*>(s.bytes.data()),
                 static_cast<std::streamsize>(s.bytes.size()));
    }
    if (!os) throw IoFailure("failed writing model file: " + path);
    return report;
}

AvatarModel load_model(const std::string& path) {
    const std::vector<std::uint8_t> buf = read_file(path);
    const std::vector<TableEntry> table = parse_table(buf, nullptr);
    auto section = [&](const std::string& name) -> Reader {
        for (const auto& e : table) {
            if (e.name == name) return Reader(buf.data() + e.offset, e.length);
        }
        throw CorruptFile("missing section: " + name);
    };

    auto section_text = [&](const std::string& name) -> std::string {
        for (const auto& e : table) {
            if (e.name == name) {
                return std::string(reinterpret_cast<const char*>(buf.data() + e.offset),
                                   e.length);
            }
        }
        throw CorruptFile("missing section: " + name);
    };

    AvatarModel m;
    {
        std::istringstream is(section_text("config"));
        std::string line;
        Config cfg = Config::defaults();
        while (std::getline(is, line)) cfg.parse_line(line);
        m.config = cfg;
    }
    {
        std::istringstream is(section_text("rig"));
        std::string line;
        std::map<std::string, std::string> kv;
        while (std::getline(is, line)) {
            const size_t eq = line.find('=');
            if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
        try {
            RigConfig rc;
            rc.rings = std::stoi(kv.at("rings"));
            rc.segments = std::stoi(kv.at("segments"));
            rc.n_blendshapes = std::stoi(kv.at("blendshapes"));
            m.rig = build_rig(rc, std::stoull(kv.at("seed")));
            if (m.rig.vertex_count() != std::stoi(kv.at("vertices")) ||
                m.rig.face_count() != std::stoi(kv.at("faces"))) {
                throw CorruptFile("rig recipe does not rebuild to the stored shape");
            }
        } catch (const std::out_of_range&) {
            throw CorruptFile("rig section missing fields");
        }
    }
    {
        Reader r = section("splats");
        parse_splats_section(r, m.splats);
    }
    {
        Reader r = section("triplane");
        m.triplane = parse_triplane_section(r);
    }
    {
        Reader r = section("lines");
        m.lines = parse_lines_section(r);
    }
    {
        Reader r = section("mlp_color");
        m.color_mlp = parse_mlp_section(r);
    }
    {
        Reader r = section("mlp_opacity");
        m.opacity_mlp = parse_mlp_section(r);
    }

    m.posenc.n_freq = static_cast<int>(m.config.get_int("posenc.frequencies"));
    m.posenc.include_input = m.config.get_bool("posenc.include_input");
    m.offset_mode = m.config.get_string("model.offset_mode") == "geometry"
                        ? OffsetMode::Geometry
                        : OffsetMode::Opacity;
    m.refresh_canonical_cache();
    m.validate();
    return m;
}

StorageReport inspect_model(const std::string& path) {
    const std::vector<std::uint8_t> buf = read_file(path);
    StorageReport report;
    const std::vector<TableEntry> table = parse_table(buf, &report.header_bytes);
    for (const auto& e : table) {
        StorageSection s{e.name, e.length, 0};
        Reader r(buf.data() + e.offset, e.length);
        if (e.name == "triplane") {
            const std::uint64_t res = r.u32();
            const std::uint64_t cxy = r.u32();
            const std::uint64_t cxz = r.u32();
            const std::uint64_t cyz = r.u32();
            const std::uint8_t dtype = r.u8();
            s.payload_bytes = res * res * (cxy + cxz + cyz) * (dtype == 1 ? 2 : 4);
        } else if (e.name == "lines") {
            const std::uint64_t n_b = r.u32();
            const std::uint64_t n_j = r.u32();
            const std::uint64_t n_s = r.u32();
            const std::uint64_t n_d2 = r.u32();
            const std::uint8_t dtype = r.u8();
            s.payload_bytes = (n_b + n_j) * 3 * n_s * n_d2 * (dtype == 1 ? 2 : 4);
        } else if (e.name == "mlp_color" || e.name == "mlp_opacity") {
            r.u8();
            const int layers = static_cast<int>(r.u32());
            std::uint64_t params = 0;
            for (int l = 0; l < layers; ++l) {
                const std::uint64_t rows = r.u32();
                const std::uint64_t cols = r.u32();
                params += rows * cols + rows;
                r.take(static_cast<size_t>((rows * cols + rows) * 4));
            }
            s.payload_bytes = params * 4;
        } else if (e.name == "splats") {
            const std::uint64_t n = r.u32();
            s.payload_bytes = n * (11 * 4 + 4);
        } else {
            s.payload_bytes = e.length;
        }
        report.sections.push_back(std::move(s));
        report.total_bytes += e.length;
    }
    report.file_bytes = buf.size();
    return report;
}

std::string format_report(const StorageReport& report) {
    std::ostringstream os;
    os << "section        bytes        payload      MiB\n";
    for (const auto& s : report.sections) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-12s %12llu %12llu %8.3f\n", s.name.c_str(),
                      static_cast<unsigned long long>(s.bytes),
                      static_cast<unsigned long long>(s.payload_bytes),
                      static_cast<double>(s.bytes) / (1024.0 * 1024.0));
        os << line;
    }
    char total[128];
    std::snprintf(total, sizeof(total), "%-12s %12llu %12s %8.3f\n", "total",
                  static_cast<unsigned long long>(report.total_bytes), "",
                  static_cast<double>(report.total_bytes) / (1024.0 * 1024.0));
    os << total;
    std::snprintf(total, sizeof(total), "%-12s %12llu (header %llu)\n", "file",
                  static_cast<unsigned long long>(report.file_bytes),
                  static_cast<unsigned long long>(report.header_bytes));
    os << total;
    return os.str();
}

std::uint16_t float_to_half(float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, 4);
    const std::uint16_t sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
    const std::uint32_t exp = (bits >> 23) & 0xffu;
    std::uint32_t mant = bits & 0x7fffffu;
    if (exp == 255u) {
        return sign | 0x7c00u | (mant ? 0x200u : 0u);
    }
    const int e = static_cast<int>(exp) - 127 + 15;
    if (e >= 31) return sign | 0x7c00u;
    if (e <= 0) {
        if (e < -10) return sign;
        mant |= 0x800000u;
        const int shift = 14 - e;
        std::uint32_t q = mant >> shift;
        const std::uint32_t rem = mant & ((1u << shift) - 1u);
        const std::uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (q & 1u))) ++q;
        return sign | static_cast<std::uint16_t>(q);
    }
    std::uint32_t half = (static_cast<std::uint32_t>(e) << 10) | (mant >> 13);
    const std::uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;
    return sign | static_cast<std::uint16_t>(half);
}

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = (static_cast<std::uint32_t>(h) & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1fu;
    const std::uint32_t mant = h & 0x3ffu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            std::uint32_t m = mant;
            int e = 0;
            while (!(m & 0x400u)) {
                m <<= 1;
                ++e;
            }
            bits = sign | (static_cast<std::uint32_t>(127 - 15 - e) << 23) |
                   ((m & 0x3ffu) << 13);
        }
    } else if (exp == 31) {
        bits = sign | 0x7f800000u | (mant << 13);
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace ctav
