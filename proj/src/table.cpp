#include "table.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace cnsm {

int DataTable::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < cols_.size(); ++i)
        if (cols_[i].name == name) return static_cast<int>(i);
    return -1;
}

const Column& DataTable::col(const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw PreconditionError("no such column: " + name);
    return cols_[i];
}

Column& DataTable::col(const std::string& name) {
    int i = index_of(name);
    if (i < 0) throw PreconditionError("no such column: " + name);
    return cols_[i];
}

const std::vector<double>& DataTable::num(const std::string& name) const {
    const Column& c = col(name);
    if (c.text) throw PreconditionError("column is not numeric: " + name);
    return c.num;
}

std::vector<double>& DataTable::num(const std::string& name) {
    Column& c = col(name);
    if (c.text) throw PreconditionError("column is not numeric: " + name);
    return c.num;
}

void DataTable::check_new(const std::string& name, std::size_t n) const {
    if (has(name)) throw ConflictError("duplicate column: " + name);
    if (!cols_.empty() && n != row_count())
        throw ConflictError("column length mismatch for " + name);
}

void DataTable::add_numeric(const std::string& name, std::vector<double> values) {
    check_new(name, values.size());
    Column c;
    c.name = name;
    c.num = std::move(values);
    cols_.push_back(std::move(c));
}

void DataTable::add_text(const std::string& name, std::vector<std::string> values) {
    check_new(name, values.size());
    Column c;
    c.name = name;
    c.text = true;
    c.str = std::move(values);
    cols_.push_back(std::move(c));
}

void DataTable::remove(const std::string& name) {
    int i = index_of(name);
    if (i < 0) throw PreconditionError("no such column: " + name);
    cols_.erase(cols_.begin() + i);
}

std::vector<std::string> DataTable::names() const {
    std::vector<std::string> out;
    out.reserve(cols_.size());
    for (const auto& c : cols_) out.push_back(c.name);
    return out;
}

std::vector<std::string> DataTable::numeric_names() const {
    std::vector<std::string> out;
    for (const auto& c : cols_)
        if (!c.text) out.push_back(c.name);
    return out;
}

bool DataTable::operator==(const DataTable& other) const {
    if (cols_.size() != other.cols_.size()) return false;
    for (std::size_t i = 0; i < cols_.size(); ++i) {
        const Column& a = cols_[i];
        const Column& b = other.cols_[i];
        if (a.name != b.name || a.text != b.text) return false;
        if (a.text) {
            if (a.str != b.str) return false;
        } else {
            if (a.num.size() != b.num.size()) return false;
            for (std::size_t r = 0; r < a.num.size(); ++r) {
                bool am = is_missing(a.num[r]), bm = is_missing(b.num[r]);
                if (am != bm) return false;
                if (!am && a.num[r] != b.num[r]) return false;
            }
        }
    }
    return true;
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string csv_to_string(const DataTable& table) {
    std::ostringstream os;
    for (std::size_t i = 0; i < table.col_count(); ++i) {
        if (i) os << ',';
        os << table.col(i).name;
    }
    os << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t i = 0; i < table.col_count(); ++i) {
            if (i) os << ',';
            const Column& c = table.col(i);
            if (c.text) {
                os << c.str[r];
            } else if (!is_missing(c.num[r])) {
                os << format_number(c.num[r]);
            }
        }
        os << '\n';
    }
    return os.str();
}

void write_csv(const DataTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << csv_to_string(table);
    if (!f) throw IoError("write failed: " + path);
}

DataTable csv_from_string(const std::string& content) {
    std::istringstream is(content);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty csv");
    std::vector<std::string> header = split_line(line);
    std::size_t ncols = header.size();

    std::vector<std::vector<std::string>> cells(ncols);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != ncols)
            throw ParseError("csv row has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(ncols));
        for (std::size_t i = 0; i < ncols; ++i) cells[i].push_back(std::move(fields[i]));
    }

    DataTable table;
    for (std::size_t i = 0; i < ncols; ++i) {
        bool numeric = true;
        std::vector<double> nums;
        nums.reserve(cells[i].size());
        for (const std::string& s : cells[i]) {
            if (s.empty()) {
                nums.push_back(kMissing);
                continue;
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                numeric = false;
                break;
            }
            nums.push_back(v);
        }
        if (numeric)
            table.add_numeric(header[i], std::move(nums));
        else
            table.add_text(header[i], std::move(cells[i]));
    }
    return table;
}

DataTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return csv_from_string(os.str());
}

}  // namespace cnsm
