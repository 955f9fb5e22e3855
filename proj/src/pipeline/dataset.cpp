// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/dataset.hpp"

#include <fstream>
#include <sstream>

#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"

namespace selnet::pipeline {

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n) throw DataError("dataset: feature rows do not match label count");
  if (features.cols() != schema.size()) throw DataError("dataset: feature width does not match schema");
  if (embeddings.rows() != n) throw DataError("dataset: embedding rows do not match label count");
  if (!ids.empty() && ids.size() != n) throw DataError("dataset: id count does not match label count");
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw DataError("dataset: labels must be 0 or 1");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.schema = schema;
  out.features = take_rows(features, rows);
  out.embeddings = take_rows(embeddings, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  if (!ids.empty()) {
    for (std::size_t r : rows) out.ids.push_back(ids.at(r));
  }
  out.comments = comments;
  return out;
}

namespace {

bool is_embedding_column(const std::string& name) { return name.rfind("emb_", 0) == 0; }

}  // namespace

Dataset parse_dataset(std::string_view text, const std::string& source, const std::optional<FeatureSchema>& schema) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t label_col = [&] {
    try {
      return table.column("label");
    } catch (const DataError&) {
      throw DataError(source + ": missing column 'label'");
    }
  }();
  const std::optional<std::size_t> id_col =
      table.has_column("id") ? std::optional<std::size_t>(table.column("id")) : std::nullopt;

  std::vector<std::size_t> emb_cols;
  for (std::size_t e = 0;; ++e) {
    const std::string name = "emb_" + std::to_string(e);
    if (!table.has_column(name)) break;
    emb_cols.push_back(table.column(name));
  }
  std::size_t stray_emb = 0;
  for (const auto& h : table.header) stray_emb += is_embedding_column(h) ? 1 : 0;
  if (stray_emb != emb_cols.size()) {
    throw DataError(source + ": embedding columns must be emb_0..emb_{E-1} without gaps");
  }

  std::vector<std::string> names;
  std::vector<std::size_t> feature_cols;
  if (schema) {
    for (const auto& name : schema->names()) {
      if (!table.has_column(name)) throw DataError(source + ": missing column '" + name + "'");
      names.push_back(name);
      feature_cols.push_back(table.column(name));
    }
  } else {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const std::string& h = table.header[c];
      if (c == label_col || (id_col && c == *id_col) || is_embedding_column(h)) continue;
      names.push_back(h);
      feature_cols.push_back(c);
    }
    if (names.empty()) throw DataError(source + ": no feature columns");
  }

  Dataset data;
  data.schema = FeatureSchema(names);
  data.comments = table.comments;
  const std::size_t n = table.rows.size();
  data.features = Matrix(n, feature_cols.size());
  data.embeddings = Matrix(n, emb_cols.size());
  data.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      data.features(r, j) = parse_double(row[feature_cols[j]], source, row_no, names[j]);
    }
    for (std::size_t e = 0; e < emb_cols.size(); ++e) {
      data.embeddings(r, e) = parse_double(row[emb_cols[e]], source, row_no, table.header[emb_cols[e]]);
    }
    const double y = parse_double(row[label_col], source, row_no, "label");
    if (y != 0.0 && y != 1.0) {
      throw DataError(source + ": row " + std::to_string(row_no) + ", column 'label': value " + row[label_col] +
                      " is not 0 or 1");
    }
    data.labels[r] = y;
    if (id_col) data.ids.push_back(row[*id_col]);
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, const std::optional<FeatureSchema>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), path.string(), schema);
}

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  for (const auto& c : data.comments) out << '#' << c << '\n';
  std::vector<std::string> header;
  if (!data.ids.empty()) header.push_back("id");
  for (const auto& n : data.schema.names()) header.push_back(n);
  header.push_back("label");
  for (std::size_t e = 0; e < data.embed_dim(); ++e) header.push_back("emb_" + std::to_string(e));
  write_csv_row(out, header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < data.size(); ++r) {
    fields.clear();
    if (!data.ids.empty()) fields.push_back(data.ids[r]);
    for (double v : data.features.row(r)) fields.push_back(format_double(v));
    fields.push_back(data.labels[r] == 1.0 ? "1" : "0");
    for (double v : data.embeddings.row(r)) fields.push_back(format_double(v));
    write_csv_row(out, fields);
  }
  return out.str();
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  const std::string text = dataset_to_csv(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

double majority_rate(std::span<const double> labels) {
  if (labels.empty()) throw PreconditionError("majority_rate: no labels");
  double pos = 0.0;
  for (double y : labels) pos += y;
  const double n = static_cast<double>(labels.size());
  return std::max(pos, n - pos) / n;
}

}  // namespace selnet::pipeline
