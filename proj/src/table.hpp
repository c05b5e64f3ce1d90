#ifndef CNSM_TABLE_HPP
#define CNSM_TABLE_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace cnsm {

// Missing-value marker for numeric cells.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct Column {
    std::string name;
    bool text = false;
    std::vector<double> num;      // valid when !text
    std::vector<std::string> str; // valid when text

    std::size_t size() const { return text ? str.size() : num.size(); }
};

// Columnar dataset with named fields. Numeric cells use NaN as the
// explicit missing marker; a column may instead hold text (ids, scenario
// names) which numeric transforms skip.
class DataTable {
public:
    std::size_t row_count() const { return cols_.empty() ? 0 : cols_.front().size(); }
    std::size_t col_count() const { return cols_.size(); }

    bool has(const std::string& name) const { return index_of(name) >= 0; }
    int index_of(const std::string& name) const;

    const Column& col(std::size_t i) const { return cols_[i]; }
    Column& col(std::size_t i) { return cols_[i]; }
    const Column& col(const std::string& name) const;
    Column& col(const std::string& name);

    const std::vector<double>& num(const std::string& name) const;
    std::vector<double>& num(const std::string& name);

    // Throws ConflictError on duplicate name or row-count mismatch
    // against existing columns.
    void add_numeric(const std::string& name, std::vector<double> values);
    void add_text(const std::string& name, std::vector<std::string> values);
    void remove(const std::string& name);

    std::vector<std::string> names() const;
    std::vector<std::string> numeric_names() const;

    bool operator==(const DataTable& other) const;

    const std::vector<Column>& columns() const { return cols_; }

private:
    void check_new(const std::string& name, std::size_t n) const;
    std::vector<Column> cols_;
};

// CSV round trip. Missing numeric cells serialize as empty fields; a
// column whose non-empty cells do not all parse as numbers reads back
// as text.
void write_csv(const DataTable& table, const std::string& path);
DataTable read_csv(const std::string& path);

std::string csv_to_string(const DataTable& table);
DataTable csv_from_string(const std::string& content);

}  // namespace cnsm

#endif
