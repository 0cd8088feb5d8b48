#include "emgrt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "emgrt/error.hpp"

namespace emgrt::io {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') {
            ++i;
        }
        const auto start = i;
        while (i < s.size() && s[i] != ' ') {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

template <class T>
bool parse_integer(std::string_view s, T& out)
{
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc{} && res.ptr == end && !s.empty();
}

bool parse_decimal(std::string_view s, double& out)
{
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out, std::chars_format::general);
    return res.ec == std::errc{} && res.ptr == end && !s.empty();
}

std::string format_shortest(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string at_line(std::string_view source, std::size_t line)
{
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

int class_index(const std::vector<std::string>& names, std::string_view label)
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == label) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::string expected_header(std::size_t channels)
{
    std::string h = "timestamp_index";
    for (std::size_t c = 1; c <= channels; ++c) {
        h += ",ch" + std::to_string(c);
    }
    return h + ",label";
}

// ---------------------------------------------------------------------------
// Model file plumbing

class SectionWriter {
public:
    explicit SectionWriter(std::string name) { text_ = "[" + name + "]\n"; }

    void text(std::string_view key, std::string_view value)
    {
        text_ += std::string(key) + "=" + std::string(value) + "\n";
    }

    void integer(std::string_view key, std::int64_t value) { text(key, std::to_string(value)); }

    void real(std::string_view key, double value)
    {
        text(key, format_hex(value));
        ++reals_;
    }

    void optional_real(std::string_view key, const std::optional<double>& value)
    {
        if (value) {
            real(key, *value);
        } else {
            text(key, "auto");
        }
    }

    void matrix(std::string_view key, const Eigen::MatrixXd& m)
    {
        text_ += std::string(key) + "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]=";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (r != 0 || c != 0) {
                    text_ += ' ';
                }
                text_ += format_hex(m(r, c));
            }
        }
        text_ += '\n';
        reals_ += static_cast<std::size_t>(m.size());
    }

    void vector(std::string_view key, const Eigen::VectorXd& v)
    {
        text_ += std::string(key) + "[" + std::to_string(v.size()) + "]=";
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (i != 0) {
                text_ += ' ';
            }
            text_ += format_hex(v[i]);
        }
        text_ += '\n';
        reals_ += static_cast<std::size_t>(v.size());
    }

    std::string finish() &&
    {
        text_ += "values=" + std::to_string(reals_) + "\n";
        return std::move(text_);
    }

private:
    std::string text_;
    std::size_t reals_ = 0;
};

struct ArrayEntry {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    bool is_matrix = false;
    std::string_view payload;
};

Error integrity_error(const std::string& what)
{
    return format_error("model integrity error: " + what);
}

class SectionReader {
public:
    SectionReader(std::string name, std::size_t line) : name_(std::move(name)), line_(line) {}

    const std::string& name() const noexcept { return name_; }

    void add(std::string_view line, std::size_t lineno)
    {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw format_error("model line " + std::to_string(lineno) + ": expected key=value");
        }
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        if (key == "values") {
            if (declared_) {
                throw format_error("model line " + std::to_string(lineno) + ": duplicate values= in [" + name_ + "]");
            }
            std::size_t n = 0;
            if (!parse_integer(value, n)) {
                throw integrity_error("[" + name_ + "] has malformed values= count");
            }
            declared_ = n;
            return;
        }
        if (declared_) {
            throw format_error("model line " + std::to_string(lineno) + ": entry after values= in [" + name_ + "]");
        }
        const auto bracket = key.find('[');
        if (bracket != std::string_view::npos) {
            if (key.back() != ']') {
                throw format_error("model line " + std::to_string(lineno) + ": malformed array key");
            }
            const auto name = std::string(key.substr(0, bracket));
            const auto dims = key.substr(bracket + 1, key.size() - bracket - 2);
            ArrayEntry a;
            a.payload = value;
            const auto x = dims.find('x');
            std::size_t r = 0;
            std::size_t c = 1;
            bool ok = true;
            if (x == std::string_view::npos) {
                ok = parse_integer(dims, r);
            } else {
                a.is_matrix = true;
                ok = parse_integer(dims.substr(0, x), r) && parse_integer(dims.substr(x + 1), c);
            }
            if (!ok) {
                throw format_error("model line " + std::to_string(lineno) + ": malformed array dimensions");
            }
            a.rows = static_cast<Eigen::Index>(r);
            a.cols = static_cast<Eigen::Index>(c);
            if (!arrays_.emplace(name, a).second) {
                throw format_error("model line " + std::to_string(lineno) + ": duplicate key " + name);
            }
        } else if (!scalars_.emplace(std::string(key), value).second) {
            throw format_error("model line " + std::to_string(lineno) + ": duplicate key " + std::string(key));
        }
    }

    std::string_view text(const std::string& key)
    {
        const auto it = scalars_.find(key);
        if (it == scalars_.end()) {
            throw format_error("model section [" + name_ + "] is missing " + key);
        }
        used_.push_back(key);
        return it->second;
    }

    std::int64_t integer(const std::string& key)
    {
        std::int64_t v = 0;
        if (!parse_integer(text(key), v)) {
            throw format_error("model key " + name_ + "." + key + " is not an integer");
        }
        return v;
    }

    bool flag(const std::string& key)
    {
        const auto v = integer(key);
        if (v != 0 && v != 1) {
            throw format_error("model key " + name_ + "." + key + " must be 0 or 1");
        }
        return v == 1;
    }

    double real(const std::string& key)
    {
        const double v = parse_hex(text(key));
        ++reals_;
        return v;
    }

    std::optional<double> optional_real(const std::string& key)
    {
        if (text(key) == "auto") {
            return std::nullopt;
        }
        return real(key);
    }

    Eigen::MatrixXd matrix(const std::string& key)
    {
        const auto& a = array(key, true);
        return fill(key, a);
    }

    Eigen::VectorXd vector(const std::string& key)
    {
        const auto& a = array(key, false);
        return fill(key, a);
    }

    void finish()
    {
        if (!declared_) {
            throw integrity_error("section [" + name_ + "] has no values= trailer (truncated file?)");
        }
        if (*declared_ != reals_) {
            throw integrity_error("section [" + name_ + "] declares " + std::to_string(*declared_) +
                                  " values but contains " + std::to_string(reals_));
        }
        const auto total = scalars_.size() + arrays_.size();
        if (used_.size() != total) {
            for (const auto& [k, v] : scalars_) {
                if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
                    throw format_error("model section [" + name_ + "] has unknown key " + k);
                }
            }
            for (const auto& [k, v] : arrays_) {
                if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
                    throw format_error("model section [" + name_ + "] has unknown array " + k);
                }
            }
        }
    }

private:
    const ArrayEntry& array(const std::string& key, bool matrix)
    {
        const auto it = arrays_.find(key);
        if (it == arrays_.end()) {
            throw format_error("model section [" + name_ + "] is missing array " + key);
        }
        if (it->second.is_matrix != matrix) {
            throw format_error("model array " + name_ + "." + key + " has the wrong rank");
        }
        used_.push_back(key);
        return it->second;
    }

    Eigen::MatrixXd fill(const std::string& key, const ArrayEntry& a)
    {
        const auto tokens = a.payload.empty() ? std::vector<std::string_view>{} : split_ws(a.payload);
        if (static_cast<Eigen::Index>(tokens.size()) != a.rows * a.cols) {
            throw integrity_error("array " + name_ + "." + key + " declares " + std::to_string(a.rows * a.cols) +
                                  " values but contains " + std::to_string(tokens.size()));
        }
        Eigen::MatrixXd m(a.rows, a.cols);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < a.rows; ++r) {
            for (Eigen::Index c = 0; c < a.cols; ++c) {
                m(r, c) = parse_hex(tokens[k++]);
            }
        }
        reals_ += tokens.size();
        return m;
    }

    std::string name_;
    std::size_t line_;
    std::map<std::string, std::string_view> scalars_;
    std::map<std::string, ArrayEntry> arrays_;
    std::vector<std::string> used_;
    std::optional<std::size_t> declared_;
    std::size_t reals_ = 0;
};

std::string join_names(const std::vector<std::string>& names)
{
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty() || names[i].find_first_of(", \t\n=") != std::string::npos) {
            throw parameter_error("class name '" + names[i] + "' cannot be stored in a model file");
        }
        if (i != 0) {
            out += ',';
        }
        out += names[i];
    }
    return out;
}

}  // namespace

std::string format_hex(double value)
{
    if (!std::isfinite(value)) {
        throw numeric_error("cannot serialize non-finite value");
    }
    char buf[64];
    char* p = buf;
    if (std::signbit(value)) {
        *p++ = '-';
        value = -value;
    }
    *p++ = '0';
    *p++ = 'x';
    const auto res = std::to_chars(p, buf + sizeof buf, value, std::chars_format::hex);
    return {buf, res.ptr};
}

double parse_hex(std::string_view text)
{
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && s.front() == '-') {
        negative = true;
        s.remove_prefix(1);
    }
    if (s.size() < 3 || s[0] != '0' || s[1] != 'x') {
        throw format_error("expected hex float, got '" + std::string(text) + "'");
    }
    s.remove_prefix(2);
    if (s.front() == '-' || s.front() == '+') {
        throw format_error("expected hex float, got '" + std::string(text) + "'");
    }
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v, std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
        throw format_error("expected hex float, got '" + std::string(text) + "'");
    }
    return negative ? -v : v;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset read_dataset(std::istream& in, const std::vector<std::string>& class_names, std::string_view source)
{
    Dataset ds;
    bool have_meta = false;
    bool have_header = false;
    std::string header;
    std::string line;
    std::size_t lineno = 0;

    std::vector<std::vector<double>> run;
    int run_label = -1;
    std::optional<std::uint64_t> last_ts;
    const auto flush = [&] {
        if (!run.empty()) {
            ds.recordings.push_back({EmgRecording::from_rows(run, ds.channels, ds.sample_rate_hz), run_label});
            run.clear();
        }
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto s = trim(line);
        if (s.empty()) {
            continue;
        }
        if (!have_header) {
            if (s.front() == '#') {
                const auto body = trim(s.substr(1));
                if (body.starts_with("rate_hz=")) {
                    if (have_meta) {
                        throw format_error(at_line(source, lineno) + "duplicate metadata line");
                    }
                    bool got_rate = false;
                    bool got_channels = false;
                    for (const auto tok : split_ws(body)) {
                        if (tok.starts_with("rate_hz=")) {
                            got_rate = parse_decimal(tok.substr(8), ds.sample_rate_hz);
                        } else if (tok.starts_with("channels=")) {
                            got_channels = parse_integer(tok.substr(9), ds.channels);
                        }
                    }
                    if (!got_rate || !got_channels || !(ds.sample_rate_hz > 0.0) || !std::isfinite(ds.sample_rate_hz) ||
                        ds.channels == 0) {
                        throw format_error(at_line(source, lineno) +
                                           "malformed metadata, expected '# rate_hz=<value> channels=<c>'");
                    }
                    have_meta = true;
                    header = expected_header(ds.channels);
                }
                continue;
            }
            if (!have_meta) {
                throw format_error(at_line(source, lineno) +
                                   "missing '# rate_hz=<value> channels=<c>' line before the header");
            }
            if (s != header) {
                throw format_error(at_line(source, lineno) + "expected header '" + header + "'");
            }
            have_header = true;
            continue;
        }

        const auto fields = split(s, ',');
        if (fields.size() != ds.channels + 2) {
            throw format_error(at_line(source, lineno) + "expected " + std::to_string(ds.channels + 2) +
                               " columns, found " + std::to_string(fields.size()));
        }
        std::uint64_t ts = 0;
        if (!parse_integer(trim(fields[0]), ts)) {
            throw format_error(at_line(source, lineno) + "malformed timestamp_index '" + std::string(fields[0]) + "'");
        }
        if (last_ts && ts <= *last_ts) {
            throw format_error(at_line(source, lineno) + "timestamp_index " + std::to_string(ts) +
                               " does not increase");
        }
        last_ts = ts;
        std::vector<double> row(ds.channels);
        for (std::size_t c = 0; c < ds.channels; ++c) {
            const auto f = trim(fields[c + 1]);
            if (!parse_decimal(f, row[c]) || !std::isfinite(row[c])) {
                throw format_error(at_line(source, lineno) + "malformed sample '" + std::string(f) + "' in channel " +
                                   std::to_string(c + 1));
            }
        }
        const auto label_text = trim(fields.back());
        const int label = class_index(class_names, label_text);
        if (label < 0) {
            throw format_error(at_line(source, lineno) + "unknown label '" + std::string(label_text) + "'");
        }
        if (label != run_label) {
            flush();
            run_label = label;
        }
        run.push_back(std::move(row));
    }
    if (!have_header) {
        throw format_error(std::string(source) + ": missing metadata or header line");
    }
    flush();
    if (ds.recordings.empty()) {
        throw data_error(std::string(source) + ": dataset has no samples");
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const std::vector<std::string>& class_names)
{
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open dataset " + path.string());
    }
    return read_dataset(in, class_names, path.string());
}

void write_dataset(std::ostream& out, const std::vector<LabeledRecording>& recordings,
                   const std::vector<std::string>& class_names, const std::vector<std::string>& comments)
{
    if (recordings.empty()) {
        throw data_error("cannot write an empty dataset");
    }
    const double rate = recordings.front().recording.sample_rate_hz();
    const auto channels = recordings.front().recording.channels();
    for (const auto& r : recordings) {
        if (r.recording.sample_rate_hz() != rate || r.recording.channels() != channels) {
            throw data_error("all recordings in a dataset must share sample rate and channel count");
        }
        if (r.label < 0 || static_cast<std::size_t>(r.label) >= class_names.size()) {
            throw data_error("recording label " + std::to_string(r.label) + " has no class name");
        }
    }
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
    out << "# rate_hz=" << format_shortest(rate) << " channels=" << channels << '\n';
    out << expected_header(channels) << '\n';
    std::uint64_t ts = 0;
    std::string line;
    for (const auto& r : recordings) {
        const auto& x = r.recording.samples();
        const auto& label = class_names[static_cast<std::size_t>(r.label)];
        for (Eigen::Index t = 0; t < x.rows(); ++t) {
            line = std::to_string(ts++);
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                line += ',';
                line += format_shortest(x(t, c));
            }
            line += ',';
            line += label;
            line += '\n';
            out << line;
        }
    }
}

void save_dataset(const std::filesystem::path& path, const std::vector<LabeledRecording>& recordings,
                  const std::vector<std::string>& class_names, const std::vector<std::string>& comments)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write dataset " + path.string());
    }
    write_dataset(out, recordings, class_names, comments);
    if (!out) {
        throw data_error("failed while writing dataset " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Model

std::string serialize_model(const TrainedPipeline& pipe)
{
    const auto& cfg = pipe.config();
    std::string out = std::string(kModelMagic) + " v" + std::to_string(kModelVersion) + "\n";

    SectionWriter meta("meta");
    meta.text("software", pipe.metadata().version);
    meta.text("seed", std::to_string(pipe.metadata().seed));
    meta.text("classes", join_names(cfg.class_names));
    out += std::move(meta).finish();

    SectionWriter win("windowing");
    win.integer("channels", static_cast<std::int64_t>(cfg.channels));
    win.real("rate_hz", cfg.sample_rate_hz);
    win.integer("window_len", static_cast<std::int64_t>(cfg.windowing.window_len_samples));
    win.integer("stride", static_cast<std::int64_t>(cfg.windowing.stride_samples));
    out += std::move(win).finish();

    SectionWriter feat("features");
    feat.real("variance_floor", cfg.features.variance_floor);
    feat.integer("zscore", cfg.features.zscore ? 1 : 0);
    out += std::move(feat).finish();

    if (pipe.scaler()) {
        SectionWriter sc("scaler");
        sc.vector("mean", pipe.scaler()->mean);
        sc.vector("scale", pipe.scaler()->scale);
        out += std::move(sc).finish();
    }

    SectionWriter proj("projection");
    proj.text("kind", projection_kind_name(cfg.projection));
    proj.integer("dims", cfg.dims);
    proj.real("fisher_ridge", cfg.fisher_ridge);
    proj.optional_real("kernel_bandwidth", cfg.kernel_bandwidth);
    proj.optional_real("kernel_reg", cfg.kernel_reg);
    proj.real("kernel_reg_scale", cfg.kernel_reg_scale);
    if (const auto* lin = std::get_if<LinearProjectionModel>(&pipe.projection())) {
        proj.vector("mean", lin->mean);
        proj.matrix("basis", lin->basis);
        proj.vector("eigenvalues", lin->eigenvalues);
    } else {
        const auto& ker = std::get<KernelProjectionModel>(pipe.projection());
        proj.real("bandwidth", ker.bandwidth());
        proj.matrix("support", ker.support());
        proj.matrix("coefficients", ker.coefficients());
        proj.vector("kernel_mean", ker.kernel_mean());
        proj.vector("eigenvalues", ker.eigenvalues());
    }
    out += std::move(proj).finish();

    const auto& rbf = pipe.classifier();
    SectionWriter cls("classifier");
    cls.integer("nodes", cfg.rbf.centers);
    cls.real("ridge", cfg.rbf.ridge);
    cls.integer("use_bias", cfg.rbf.use_bias ? 1 : 0);
    cls.matrix("centers", rbf.centers);
    cls.vector("widths", rbf.widths);
    cls.matrix("weights", rbf.weights);
    cls.vector("bias", rbf.bias);
    out += std::move(cls).finish();

    out += "[end]\n";
    return out;
}

TrainedPipeline parse_model(std::string_view text)
{
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw format_error("model file is empty");
    }
    const auto magic = trim(lines.front());
    const std::string prefix = std::string(kModelMagic) + " v";
    if (!magic.starts_with(prefix)) {
        throw format_error("not a model file: missing '" + std::string(kModelMagic) + " v" +
                           std::to_string(kModelVersion) + "' magic line");
    }
    if (magic != prefix + std::to_string(kModelVersion)) {
        throw format_error("unsupported version '" + std::string(magic.substr(prefix.size())) +
                           "' (this build reads v" + std::to_string(kModelVersion) + ")");
    }

    std::vector<SectionReader> sections;
    bool ended = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (ended) {
            if (!s.empty()) {
                throw format_error("model line " + std::to_string(i + 1) + ": content after [end]");
            }
            continue;
        }
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw format_error("model line " + std::to_string(i + 1) + ": malformed section header");
            }
            const auto name = std::string(s.substr(1, s.size() - 2));
            if (name == "end") {
                ended = true;
                continue;
            }
            for (const auto& sec : sections) {
                if (sec.name() == name) {
                    throw format_error("model line " + std::to_string(i + 1) + ": duplicate section [" + name + "]");
                }
            }
            sections.emplace_back(name, i + 1);
            continue;
        }
        if (sections.empty()) {
            throw format_error("model line " + std::to_string(i + 1) + ": entry outside any section");
        }
        sections.back().add(s, i + 1);
    }
    if (!ended) {
        throw integrity_error("missing [end] marker (truncated file?)");
    }

    const auto find = [&](const std::string& name) -> SectionReader* {
        for (auto& s : sections) {
            if (s.name() == name) {
                return &s;
            }
        }
        return nullptr;
    };
    const auto require = [&](const std::string& name) -> SectionReader& {
        auto* s = find(name);
        if (s == nullptr) {
            throw integrity_error("missing section [" + name + "]");
        }
        return *s;
    };
    for (const auto& s : sections) {
        static const std::array<std::string_view, 6> known = {"meta", "windowing", "features",
                                                               "scaler", "projection", "classifier"};
        if (std::find(known.begin(), known.end(), s.name()) == known.end()) {
            throw format_error("unknown model section [" + s.name() + "]");
        }
    }

    PipelineConfig cfg;
    PipelineMetadata meta;
    {
        auto& s = require("meta");
        meta.version = std::string(s.text("software"));
        if (!parse_integer(s.text("seed"), meta.seed)) {
            throw format_error("model key meta.seed is not an unsigned integer");
        }
        cfg.class_names.clear();
        for (const auto name : split(s.text("classes"), ',')) {
            cfg.class_names.emplace_back(name);
        }
        s.finish();
    }
    {
        auto& s = require("windowing");
        const auto channels = s.integer("channels");
        const auto len = s.integer("window_len");
        const auto stride = s.integer("stride");
        if (channels <= 0 || len <= 0 || stride <= 0) {
            throw format_error("model windowing values must be positive");
        }
        cfg.channels = static_cast<std::size_t>(channels);
        cfg.sample_rate_hz = s.real("rate_hz");
        cfg.windowing.window_len_samples = static_cast<std::size_t>(len);
        cfg.windowing.stride_samples = static_cast<std::size_t>(stride);
        s.finish();
    }
    {
        auto& s = require("features");
        cfg.features.variance_floor = s.real("variance_floor");
        cfg.features.zscore = s.flag("zscore");
        s.finish();
    }
    std::optional<FeatureScaler> scaler;
    if (auto* s = find("scaler")) {
        FeatureScaler fs;
        fs.mean = s->vector("mean");
        fs.scale = s->vector("scale");
        s->finish();
        scaler = std::move(fs);
    }

    ProjectionModel projection;
    {
        auto& s = require("projection");
        const auto kind = s.text("kind");
        if (kind == "linear") {
            cfg.projection = ProjectionKind::Linear;
        } else if (kind == "kernel") {
            cfg.projection = ProjectionKind::Kernel;
        } else {
            throw format_error("unknown projection kind '" + std::string(kind) + "'");
        }
        cfg.dims = static_cast<int>(s.integer("dims"));
        cfg.fisher_ridge = s.real("fisher_ridge");
        cfg.kernel_bandwidth = s.optional_real("kernel_bandwidth");
        cfg.kernel_reg = s.optional_real("kernel_reg");
        cfg.kernel_reg_scale = s.real("kernel_reg_scale");
        if (cfg.projection == ProjectionKind::Linear) {
            LinearProjectionModel m;
            m.mean = s.vector("mean");
            m.basis = s.matrix("basis");
            m.eigenvalues = s.vector("eigenvalues");
            if (m.basis.cols() != m.mean.size() || m.eigenvalues.size() != m.basis.rows()) {
                throw format_error("linear projection arrays have inconsistent shapes");
            }
            projection = std::move(m);
        } else {
            const double bw = s.real("bandwidth");
            auto support = s.matrix("support");
            auto coeffs = s.matrix("coefficients");
            auto kmean = s.vector("kernel_mean");
            auto eig = s.vector("eigenvalues");
            try {
                projection = KernelProjectionModel(std::move(support), bw, std::move(coeffs), std::move(kmean),
                                                   std::move(eig));
            } catch (const Error& e) {
                throw format_error(std::string("kernel projection: ") + e.what());
            }
        }
        s.finish();
    }

    RbfModel rbf;
    {
        auto& s = require("classifier");
        cfg.rbf.centers = static_cast<int>(s.integer("nodes"));
        cfg.rbf.ridge = s.real("ridge");
        cfg.rbf.use_bias = s.flag("use_bias");
        rbf.centers = s.matrix("centers");
        rbf.widths = s.vector("widths");
        rbf.weights = s.matrix("weights");
        rbf.bias = s.vector("bias");
        rbf.class_names = cfg.class_names;
        s.finish();
    }

    try {
        return TrainedPipeline(std::move(cfg), std::move(scaler), std::move(projection), std::move(rbf),
                               std::move(meta));
    } catch (const Error& e) {
        throw format_error(std::string("inconsistent model: ") + e.what());
    }
}

void save_model(const TrainedPipeline& pipe, const std::filesystem::path& path)
{
    const auto text = serialize_model(pipe);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write model " + path.string());
    }
    out << text;
    if (!out) {
        throw data_error("failed while writing model " + path.string());
    }
}

TrainedPipeline load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open model " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string fixed2(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

std::string fixed4(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

}  // namespace

void write_evaluation_report(std::ostream& out, const EvaluationReport& report,
                             const std::vector<std::string>& provenance)
{
    out << "# emgrt evaluation report\n";
    for (const auto& p : provenance) {
        out << "# " << p << '\n';
    }
    out << "motion,windows,correct,accuracy_pct\n";
    std::int64_t correct = 0;
    for (std::size_t c = 0; c < report.class_names.size(); ++c) {
        const auto hit = report.confusion(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
        correct += hit;
        out << report.class_names[c] << ',' << report.counts[c] << ',' << hit << ','
            << (report.class_accuracy_pct[c] ? fixed2(*report.class_accuracy_pct[c]) : std::string("n/a")) << '\n';
    }
    out << "total," << report.total_windows << ',' << correct << ',' << fixed2(report.total_accuracy_pct) << '\n';
    out << "\n# confusion matrix: rows = true motion, columns = decided motion\n";
    out << "true\\decided";
    for (const auto& n : report.class_names) {
        out << ',' << n;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
        out << report.class_names[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) {
            out << ',' << report.confusion(r, c);
        }
        out << '\n';
    }
}

void write_latency_report(std::ostream& out, const LatencyReport& report, const std::vector<std::string>& provenance)
{
    out << "# emgrt latency report\n";
    for (const auto& p : provenance) {
        out << "# " << p << '\n';
    }
    out << "metric,value\n";
    out << "windows," << report.windows << '\n';
    out << "repetitions," << report.repetitions << '\n';
    out << "evaluations," << report.times_ms.size() << '\n';
    out << "mean_ms," << fixed4(report.mean_ms) << '\n';
    out << "p95_ms," << fixed4(report.p95_ms) << '\n';
    out << "p99_ms," << fixed4(report.p99_ms) << '\n';
    out << "max_ms," << fixed4(report.max_ms) << '\n';
    out << "deadline_ms," << fixed4(report.deadline_ms) << '\n';
    out << "deadline_misses," << report.misses << '\n';
}

}  // namespace emgrt::io
