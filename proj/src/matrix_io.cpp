#include "biberdist/matrix_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "biberdist/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace biberdist {

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    out.push_back(std::move(field));
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + s + "'", line_no);
    return v;
}

}  // namespace

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
    const auto& inv = FeatureInventory::standard();
    out << "doc_id,register,source";
    for (const auto& f : inv.features()) out << ',' << f.id;
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << detail::csv_field(m.doc_ids[r]) << ',' << detail::csv_field(m.register_label) << ','
            << detail::csv_field(m.source);
        for (double v : m.values.row(r)) out << ',' << detail::format_double(v);
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(std::istream& in) {
    const auto& inv = FeatureInventory::standard();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty feature file", 1);
    const auto header = split_csv_line(line, 1);
    if (header.size() != inv.size() + 3 || header[0] != "doc_id" || header[1] != "register" || header[2] != "source")
        throw ParseError("feature header must be doc_id,register,source followed by " +
                             std::to_string(inv.size()) + " feature ids",
                         1);
    for (std::size_t j = 0; j < inv.size(); ++j)
        if (header[j + 3] != inv[j].id)
            throw ParseError("column " + std::to_string(j + 4) + " is '" + header[j + 3] + "', expected '" +
                                 std::string(inv[j].id) + "'",
                             1);
    FeatureMatrix m;
    std::size_t line_no = 1;
    std::vector<double> row(inv.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        if (m.rows() == 0) {
            m.register_label = fields[1];
            m.source = fields[2];
        } else if (fields[1] != m.register_label || fields[2] != m.source) {
            throw ParseError("register/source differ from the first row", line_no);
        }
        for (std::size_t j = 0; j < inv.size(); ++j) row[j] = parse_double(fields[j + 3], line_no);
        m.doc_ids.push_back(fields[0]);
        m.values.append_row(row);
    }
    return m;
}

void write_feature_jsonl(std::ostream& out, const FeatureMatrix& m) {
    const auto& inv = FeatureInventory::standard();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::ordered_json j;
        j["doc_id"] = m.doc_ids[r];
        j["register"] = m.register_label;
        j["source"] = m.source;
        nlohmann::ordered_json f;
        for (std::size_t c = 0; c < inv.size(); ++c) f[std::string(inv[c].id)] = m.values(r, c);
        j["features"] = std::move(f);
        out << j.dump() << '\n';
    }
}

void write_dimension_scores_long(std::ostream& out, const std::string& source,
                                 const std::vector<DimensionScores>& scores, bool header) {
    if (header) out << "source,doc_id,dimension,score\n";
    for (const auto& s : scores)
        for (std::size_t d = 0; d < kDimensionCount; ++d)
            out << detail::csv_field(source) << ',' << detail::csv_field(s.doc_id) << ',' << d + 1 << ','
                << detail::format_double(s.scores[d]) << '\n';
}

}  // namespace biberdist
