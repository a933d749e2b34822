#include "fer/data_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace fer::io {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find(sep, start);
        if (end == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = end + 1;
    }
    return out;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line_no, const std::string& what) {
    throw InputError(source + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view s, const std::string& context) {
    const std::string str(trim(s));
    if (str.empty()) throw InputError(context + ": empty number");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(str, &used);
    } catch (const std::exception&) {
        throw InputError(context + ": not a number '" + str + "'");
    }
    if (used != str.size()) throw InputError(context + ": not a number '" + str + "'");
    return v;
}

constexpr std::string_view kManifestHeader = "sample_id,image_path,label,actor_id,landmarks_path";
constexpr std::string_view kLabelsPrefix = "#labels:";

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------- manifest

int DatasetManifest::label_index(std::string_view name) const {
    for (std::size_t i = 0; i < label_names.size(); ++i) {
        if (label_names[i] == name) return static_cast<int>(i);
    }
    throw InputError("unknown label '" + std::string(name) + "'");
}

DatasetManifest parse_manifest(std::string_view text, std::string source_name) {
    DatasetManifest m;
    m.source_name = source_name;
    const auto lines = lines_of(text);
    std::size_t i = 0;
    auto next_content = [&]() -> std::optional<std::size_t> {
        while (i < lines.size() && trim(lines[i]).empty()) ++i;
        if (i >= lines.size()) return std::nullopt;
        return i++;
    };

    const auto label_line = next_content();
    if (!label_line || !lines[*label_line].starts_with(kLabelsPrefix)) {
        fail_at(source_name, label_line ? *label_line + 1 : 1, "expected '#labels: ...' line");
    }
    for (const auto& name : split(lines[*label_line].substr(kLabelsPrefix.size()), ',')) {
        const auto t = trim(name);
        if (t.empty()) fail_at(source_name, *label_line + 1, "empty label name");
        for (const auto& existing : m.label_names) {
            if (existing == t) fail_at(source_name, *label_line + 1, "duplicate label '" + std::string(t) + "'");
        }
        m.label_names.emplace_back(t);
    }

    const auto header_line = next_content();
    if (!header_line) fail_at(source_name, lines.size() + 1, "missing header row");
    if (trim(lines[*header_line]) != kManifestHeader) {
        const auto cols = split(trim(lines[*header_line]), ',');
        for (std::string_view want : {"sample_id", "image_path", "label", "actor_id", "landmarks_path"}) {
            bool found = false;
            for (const auto& c : cols) found = found || c == want;
            if (!found) fail_at(source_name, *header_line + 1, "missing column '" + std::string(want) + "'");
        }
        fail_at(source_name, *header_line + 1,
                "header must be exactly '" + std::string(kManifestHeader) + "'");
    }

    std::set<std::string> seen;
    while (auto li = next_content()) {
        const std::size_t line_no = *li + 1;
        const auto fields = split(lines[*li], ',');
        if (fields.size() != 5) {
            fail_at(source_name, line_no, "expected 5 columns, got " + std::to_string(fields.size()));
        }
        ManifestEntry e;
        e.sample_id = fields[0];
        e.image_path = fields[1];
        if (e.sample_id.empty()) fail_at(source_name, line_no, "empty sample_id");
        if (!seen.insert(e.sample_id).second) {
            fail_at(source_name, line_no, "duplicate sample_id '" + e.sample_id + "'");
        }
        bool known = false;
        for (std::size_t k = 0; k < m.label_names.size(); ++k) {
            if (m.label_names[k] == fields[2]) {
                e.label = static_cast<int>(k);
                known = true;
            }
        }
        if (!known) fail_at(source_name, line_no, "label '" + fields[2] + "' not in #labels list");
        if (!fields[3].empty()) e.actor_id = fields[3];
        if (!fields[4].empty()) e.landmarks_path = fields[4];
        m.entries.push_back(std::move(e));
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_file(path), path.string());
}

std::string format_manifest(const DatasetManifest& m) {
    std::string out(kLabelsPrefix);
    out += ' ';
    for (std::size_t i = 0; i < m.label_names.size(); ++i) {
        if (i) out += ',';
        out += m.label_names[i];
    }
    out += '\n';
    out += kManifestHeader;
    out += '\n';
    for (const auto& e : m.entries) {
        if (e.label < 0 || static_cast<std::size_t>(e.label) >= m.label_names.size()) {
            throw InputError("entry '" + e.sample_id + "' has out-of-range label");
        }
        out += e.sample_id + ',' + e.image_path + ',' + m.label_names[static_cast<std::size_t>(e.label)] + ',' +
               e.actor_id.value_or("") + ',' + e.landmarks_path.value_or("") + '\n';
    }
    return out;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    write_file(path, format_manifest(m));
}

void check_single_peak(const DatasetManifest& m) {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& e : m.entries) {
        if (!e.actor_id) continue;
        if (!seen.emplace(*e.actor_id, e.label).second) {
            throw InputError("actor '" + *e.actor_id + "' has more than one sample with label '" +
                             m.label_names[static_cast<std::size_t>(e.label)] + "' (sample '" + e.sample_id +
                             "')");
        }
    }
}

std::filesystem::path resolve_relative(const std::filesystem::path& manifest_path, const std::string& p) {
    std::filesystem::path rel(p);
    if (rel.is_absolute()) return rel;
    return manifest_path.parent_path() / rel;
}

// --------------------------------------------------------------- landmarks

const Point2& LandmarkSet::at(const std::string& name) const {
    const auto it = points.find(name);
    if (it == points.end()) throw InputError("landmark '" + name + "' missing");
    return it->second;
}

void validate(const LandmarkSet& lm) {
    for (const char* name : {kLeftEye, kRightEye, kMouth}) {
        if (!lm.points.contains(name)) throw InputError(std::string("landmark '") + name + "' missing");
    }
    for (const auto& [name, p] : lm.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError("landmark '" + name + "' not finite");
    }
    if (!lm.mirrored && lm.left_eye().x > lm.right_eye().x) {
        throw InputError("left_eye_center lies right of right_eye_center; declare mirrored=true if intended");
    }
}

LandmarkSet parse_landmarks(std::string_view text) {
    LandmarkSet lm;
    std::size_t line_no = 0;
    for (auto raw : lines_of(text)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.starts_with("mirrored=")) {
            const auto v = line.substr(9);
            if (v == "true") {
                lm.mirrored = true;
            } else if (v == "false") {
                lm.mirrored = false;
            } else {
                fail_at("landmarks", line_no, "mirrored must be true or false");
            }
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 3) fail_at("landmarks", line_no, "expected name,x,y");
        const std::string ctx = "landmarks:" + std::to_string(line_no);
        const std::string name(trim(f[0]));
        if (name.empty()) fail_at("landmarks", line_no, "empty landmark name");
        if (!lm.points.emplace(name, Point2{parse_double(f[1], ctx), parse_double(f[2], ctx)}).second) {
            fail_at("landmarks", line_no, "duplicate landmark '" + name + "'");
        }
    }
    validate(lm);
    return lm;
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
    try {
        return parse_landmarks(read_file(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string format_landmarks(const LandmarkSet& lm) {
    std::ostringstream out;
    out.precision(17);
    if (lm.mirrored) out << "mirrored=true\n";
    for (const auto& [name, p] : lm.points) out << name << ',' << p.x << ',' << p.y << '\n';
    return out.str();
}

// ------------------------------------------------------------------ images

namespace {

struct PnmCursor {
    std::string_view bytes;
    std::size_t pos = 0;

    void skip_ws_and_comments() {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos;
            } else {
                break;
            }
        }
    }

    long read_int(const char* what) {
        skip_ws_and_comments();
        const std::size_t start = pos;
        long v = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1'000'000'000L) throw InputError(std::string("PNM ") + what + " too large");
            ++pos;
        }
        if (pos == start) throw InputError(std::string("PNM header: expected ") + what);
        return v;
    }
};

}  // namespace

Image decode_pnm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw InputError("not a binary PGM/PPM file (expected magic P5 or P6)");
    }
    const int channels = bytes[1] == '5' ? 1 : 3;
    PnmCursor cur{bytes, 2};
    const long w = cur.read_int("width");
    const long h = cur.read_int("height");
    const long maxval = cur.read_int("maxval");
    if (maxval != 255) throw InputError("unsupported PNM maxval " + std::to_string(maxval) + " (only 255)");
    if (w < 1 || h < 1) throw InputError("PNM dimensions must be positive");
    if (cur.pos >= bytes.size()) throw InputError("PNM truncated after header");
    ++cur.pos;  // exactly one whitespace byte separates header and payload
    const auto need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
    const std::size_t have = bytes.size() - cur.pos;
    if (have < need) {
        throw InputError("PNM payload truncated: expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(have));
    }
    if (have > need) throw InputError("PNM has " + std::to_string(have - need) + " trailing bytes");
    Image img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.channels = channels;
    img.pixels.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + cur.pos),
                      reinterpret_cast<const std::uint8_t*>(bytes.data() + cur.pos + need));
    return img;
}

Image load_image(const std::filesystem::path& path) {
    try {
        return decode_pnm(read_file(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string encode_pnm(const Image& img) {
    validate(img);
    std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                      std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    return out;
}

void save_image(const Image& img, const std::filesystem::path& path) { write_file(path, encode_pnm(img)); }

// --------------------------------------------------------- feature records

namespace {

static_assert(std::endian::native == std::endian::little, "feature/model files assume a little-endian host");

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

std::vector<FeatureRecord> decode_feature_records(std::string_view bytes) {
    const std::size_t nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw InputError("feature file: missing JSON header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("feature file: bad header: ") + e.what());
    }
    std::size_t count = 0;
    std::size_t dim = 0;
    FeatureKind kind{};
    try {
        count = header.at("count").get<std::size_t>();
        dim = header.at("dim").get<std::size_t>();
        kind = parse_feature_kind(header.at("feature_kind").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("feature file: header field: ") + e.what());
    }
    if (count > 0 && dim == 0) throw InputError("feature file: dim must be positive");

    std::vector<FeatureRecord> out;
    out.reserve(count);
    std::set<std::tuple<std::string, int, int>> keys;
    std::size_t pos = nl + 1;
    auto need = [&](std::size_t n, std::size_t row) {
        if (bytes.size() - pos < n) {
            throw InputError("feature file: truncated payload at row " + std::to_string(row));
        }
    };
    for (std::size_t row = 0; row < count; ++row) {
        need(2, row);
        const auto len = static_cast<std::size_t>(static_cast<unsigned char>(bytes[pos])) |
                         (static_cast<std::size_t>(static_cast<unsigned char>(bytes[pos + 1])) << 8);
        pos += 2;
        need(len + 2 + dim * 4, row);
        FeatureRecord r;
        r.feature_kind = kind;
        r.sample_id.assign(bytes.substr(pos, len));
        pos += len;
        if (r.sample_id.empty()) throw InputError("feature file: empty sample_id at row " + std::to_string(row));
        const auto patch = static_cast<unsigned char>(bytes[pos++]);
        if (patch > 3) throw InputError("feature file: bad patch id at row " + std::to_string(row));
        r.patch_id = static_cast<PatchId>(patch);
        r.crop_id = static_cast<unsigned char>(bytes[pos++]);
        if (r.crop_id > 9 && r.crop_id != kSingleCrop) {
            throw InputError("feature file: bad crop id at row " + std::to_string(row));
        }
        r.values.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            float f;
            std::memcpy(&f, bytes.data() + pos, 4);
            pos += 4;
            if (!std::isfinite(f)) {
                throw InputError("feature file: non-finite value at row " + std::to_string(row));
            }
            r.values[k] = f;
        }
        if (!keys.emplace(r.sample_id, patch, r.crop_id).second) {
            throw InputError("feature file: duplicate record (" + r.sample_id + ", " +
                             std::string(to_string(r.patch_id)) + ", crop " + std::to_string(r.crop_id) +
                             ") at row " + std::to_string(row));
        }
        out.push_back(std::move(r));
    }
    if (pos != bytes.size()) {
        throw InputError("feature file: " + std::to_string(bytes.size() - pos) +
                         " trailing bytes after declared rows");
    }
    return out;
}

std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path) {
    try {
        return decode_feature_records(read_file(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string encode_feature_records(const std::vector<FeatureRecord>& records) {
    const std::size_t dim = records.empty() ? 0 : records.front().values.size();
    const FeatureKind kind = records.empty() ? FeatureKind::deep : records.front().feature_kind;
    nlohmann::json header = {{"count", records.size()}, {"dim", dim}, {"feature_kind", to_string(kind)}};
    std::string out = header.dump() + "\n";
    for (const auto& r : records) {
        if (r.values.size() != dim || r.feature_kind != kind) {
            throw InputError("feature records in one file must share kind and dimension");
        }
        if (r.sample_id.empty() || r.sample_id.size() > 0xffff) throw InputError("bad sample_id length");
        put_u16(out, static_cast<std::uint16_t>(r.sample_id.size()));
        out += r.sample_id;
        out.push_back(static_cast<char>(r.patch_id));
        out.push_back(static_cast<char>(static_cast<unsigned char>(r.crop_id)));
        for (double v : r.values) {
            const auto f = static_cast<float>(v);
            if (!std::isfinite(f)) throw InputError("non-finite feature value for '" + r.sample_id + "'");
            char buf[4];
            std::memcpy(buf, &f, 4);
            out.append(buf, 4);
        }
    }
    return out;
}

void save_feature_records(const std::vector<FeatureRecord>& records, const std::filesystem::path& path) {
    write_file(path, encode_feature_records(records));
}

}  // namespace fer::io
