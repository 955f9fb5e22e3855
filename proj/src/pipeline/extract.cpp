// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/extract.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"
#include "selnet/pipeline/synth.hpp"

namespace selnet::pipeline {

namespace {

std::filesystem::path find_image(const std::filesystem::path& dir, const std::string& id) {
  for (const char* ext : {".png", ".jpg", ".jpeg"}) {
    const auto p = dir / (id + ext);
    if (std::filesystem::exists(p)) return p;
  }
  throw DataError("no image for id '" + id + "' in " + dir.string() + " (.png, .jpg, .jpeg)");
}

std::optional<double> optional_cell(const CsvTable& t, std::size_t r, const std::string& column,
                                    const std::string& source) {
  if (!t.has_column(column)) return std::nullopt;
  const std::string& c = t.rows[r][t.column(column)];
  if (c.find_first_not_of(' ') == std::string::npos) return std::nullopt;
  return parse_double(c, source, r + 1, column);
}

std::map<std::string, std::vector<tongue::DetectionBox>> read_detections(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::string src = path.string();
  const std::size_t id = t.column("image_id"), cls = t.column("class");
  const std::size_t x0 = t.column("x_min"), y0 = t.column("y_min"), x1 = t.column("x_max"), y1 = t.column("y_max");
  std::map<std::string, std::vector<tongue::DetectionBox>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    tongue::DetectionBox b;
    b.cls = row[cls];
    b.x_min = parse_double(row[x0], src, r + 1, "x_min");
    b.y_min = parse_double(row[y0], src, r + 1, "y_min");
    b.x_max = parse_double(row[x1], src, r + 1, "x_max");
    b.y_max = parse_double(row[y1], src, r + 1, "y_max");
    out[row[id]].push_back(b);
  }
  return out;
}

}  // namespace

ExtractSummary run_extract(const ExtractPaths& paths, const tongue::ExtractionConfig& config) {
  const CsvTable physio = read_csv(paths.physio_csv);
  const std::string src = paths.physio_csv.string();
  const std::size_t id_col = physio.column("id");
  const auto& names = tongue::physiological_names();
  const bool has_label = physio.has_column("label");
  const auto detections = paths.detections_csv ? read_detections(*paths.detections_csv)
                                               : std::map<std::string, std::vector<tongue::DetectionBox>>{};

  const tongue::FeatureSchema& schema = tongue::tongue_schema();
  std::ostringstream out;
  out << "#schema=" << tongue::kTongueSchemaVersion << '\n';
  std::vector<std::string> header{"id"};
  header.insert(header.end(), schema.names().begin(), schema.names().end());
  if (has_label) header.push_back("label");
  for (std::size_t e = 0; e < paths.embed_dim; ++e) header.push_back("emb_" + std::to_string(e));
  write_csv_row(out, header);

  std::ostringstream flags_out;
  write_csv_row(flags_out, {"id", "flags"});

  ExtractSummary summary;
  for (std::size_t r = 0; r < physio.rows.size(); ++r) {
    const std::string& id = physio.rows[r][id_col];
    tongue::PhysioRecord rec;
    if (physio.has_column(names[0])) {
      const std::string& g = physio.rows[r][physio.column(names[0])];
      if (!g.empty()) {
        try {
          rec.gender = tongue::encode_gender(g);
        } catch (const std::exception& e) {
          throw DataError(src + ": row " + std::to_string(r + 1) + ", column 'Gender': " + e.what());
        }
      }
    }
    rec.age = optional_cell(physio, r, names[1], src);
    rec.height_cm = optional_cell(physio, r, names[2], src);
    rec.weight_kg = optional_cell(physio, r, names[3], src);
    rec.waist = optional_cell(physio, r, names[4], src);
    rec.hip = optional_cell(physio, r, names[5], src);
    rec.whr = optional_cell(physio, r, names[6], src);
    rec.whtr = optional_cell(physio, r, names[7], src);
    rec.bmi = optional_cell(physio, r, names[8], src);

    tongue::TongueObservation obs{tongue::read_rgb_image(find_image(paths.image_dir, id)),
                                  tongue::read_mask(paths.mask_dir / (id + ".png"))};
    const auto it = detections.find(id);
    const tongue::DetectionInput det =
        tongue::summarize_detections(it == detections.end() ? std::vector<tongue::DetectionBox>{} : it->second,
                                     obs.mask);
    tongue::FeatureVector fv;
    try {
      fv = tongue::extract_features(obs, rec, det, schema, config);
    } catch (const DataError& e) {
      throw DataError("id '" + id + "': " + e.what());
    }

    std::vector<std::string> row{id};
    for (double v : fv.values) row.push_back(format_double(v));
    if (has_label) {
      const std::string& y = physio.rows[r][physio.column("label")];
      if (y != "0" && y != "1") {
        throw DataError(src + ": row " + std::to_string(r + 1) + ", column 'label': value " + y + " is not 0 or 1");
      }
      row.push_back(y);
    }
    for (double v : embed_stub(id, paths.embed_dim)) row.push_back(format_double(v));
    write_csv_row(out, row);

    if (!fv.flags.empty()) {
      std::string joined;
      for (const auto& f : fv.flags) joined += (joined.empty() ? "" : ";") + f;
      write_csv_row(flags_out, {id, joined});
      ++summary.flagged_rows;
    }
    ++summary.rows;
  }

  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    f << text;
  };
  write(paths.out, out.str());
  write(std::filesystem::path(paths.out.string() + ".flags.csv"), flags_out.str());
  return summary;
}

}  // namespace selnet::pipeline
