#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "insar/catalog.hpp"
#include "insar/error.hpp"
#include "insar/fileio.hpp"
#include "insar/geometry.hpp"
#include "insar/parallel.hpp"
#include "insar/pipeline.hpp"
#include "insar/profile.hpp"
#include "insar/ps.hpp"
#include "insar/trend.hpp"
#include "insar/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace insar;
using workflow::run_stage;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitContract = 1;
constexpr int kExitUsage = 2;

int exit_code(Errc code) {
  switch (code) {
    case Errc::Io:
    case Errc::MissingSidecar:
    case Errc::InvalidArgument:
      return kExitUsage;
    default:
      return kExitContract;
  }
}

void report_error(const std::string& stage, const std::string& code, const std::string& message) {
  std::cerr << json{{"stage", stage}, {"code", code}, {"message", message}}.dump() << '\n';
}

struct Common {
  std::string config;
  std::uint64_t seed = 7;
  bool seed_set = false;
  int threads = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t v) { c.seed = v, c.seed_set = true; }, "RNG seed");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 256));
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
}

pipeline::ProcessingConfig processing_config(const Common& c) {
  pipeline::ProcessingConfig p =
      c.config.empty() ? pipeline::ProcessingConfig{} : pipeline::processing_from_json(read_json(c.config));
  p.threads = c.threads;
  return p;
}

std::vector<Pixel> line_pixels(const std::string& line_path, const GridMeta& grid) {
  if (line_path.empty()) return {};
  return rasterize_polyline(load_geojson_line(line_path), grid).pixels;
}

std::string compact_date(const Date& d) {
  std::string s = d.to_string();
  std::erase(s, '-');
  return s;
}

SearchQuery query_from(const std::string& config, const std::vector<double>& bbox,
                       const std::string& start, const std::string& end,
                       const std::string& platform, const std::string& level) {
  SearchQuery q{8.88, 44.42, 8.92, 44.44, Date::parse("2017-08-01"), Date::parse("2018-08-14")};
  if (!config.empty()) {
    const json j = read_json(config);
    try {
      if (j.contains("bbox")) {
        const auto b = j.at("bbox").get<std::vector<double>>();
        if (b.size() != 4) throw Error(Errc::Schema, "bbox needs four numbers");
        q.min_lon = b[0], q.min_lat = b[1], q.max_lon = b[2], q.max_lat = b[3];
      }
      if (j.contains("start")) q.start = Date::parse(j.at("start").get<std::string>());
      if (j.contains("end")) q.end = Date::parse(j.at("end").get<std::string>());
      if (j.contains("platform")) q.platform = j.at("platform").get<std::string>();
      if (j.contains("processing_level")) q.processing_level = j.at("processing_level").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::Schema, config + ": " + e.what());
    }
  }
  if (!bbox.empty()) {
    if (bbox.size() != 4) throw Error(Errc::InvalidArgument, "--bbox needs MINLON,MINLAT,MAXLON,MAXLAT");
    q.min_lon = bbox[0], q.min_lat = bbox[1], q.max_lon = bbox[2], q.max_lat = bbox[3];
  }
  if (!start.empty()) q.start = Date::parse(start);
  if (!end.empty()) q.end = Date::parse(end);
  if (!platform.empty()) q.platform = platform;
  if (!level.empty()) q.processing_level = level;
  return q;
}

struct QueryArgs {
  std::string config;
  std::vector<double> bbox;
  std::string start, end, platform, level;
};

void add_query_options(CLI::App* cmd, QueryArgs& a) {
  cmd->add_option("--config", a.config, "Query JSON {bbox, start, end, platform, processing_level}")
      ->check(CLI::ExistingFile);
  cmd->add_option("--bbox", a.bbox, "MINLON,MINLAT,MAXLON,MAXLAT")->delimiter(',');
  cmd->add_option("--start", a.start, "Start date YYYY-MM-DD");
  cmd->add_option("--end", a.end, "End date YYYY-MM-DD");
  cmd->add_option("--platform", a.platform, "Platform (default Sentinel-1)");
  cmd->add_option("--level", a.level, "Processing level (default SLC)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"insar: DInSAR processing for structural displacement monitoring"};
  app.require_subcommand(1);
  std::string stage = "cli";
  std::function<void()> action;

  // synth
  Common synth_c;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic SLC stack with known truth");
  add_common(synth, synth_c, true);
  synth->callback([&] {
    action = [&] {
      stage = "synth";
      run_stage(stage, [&] {
        synth::ScenarioConfig cfg = synth_c.config.empty()
                                        ? synth::bridge_scenario_default(synth_c.seed)
                                        : workflow::load_scenario(synth_c.config);
        if (synth_c.seed_set) cfg.rng_seed = synth_c.seed;
        const auto truth = synth::generate(cfg, synth_c.threads);
        workflow::write_synthetic(synth_c.out, cfg, truth);
      });
    };
  });

  // catalog
  auto* catalog = app.add_subcommand("catalog", "Manage acquisition catalogs");
  catalog->require_subcommand(1);
  std::string cat_path, slc_path, acq_id;
  double baseline = 0.0;
  int max_days = 12;
  auto* cat_add = catalog->add_subcommand("add", "Add an SLC (from its sidecar) to a catalog");
  cat_add->add_option("--catalog", cat_path, "Catalog JSON (created if missing)")->required();
  cat_add->add_option("--slc", slc_path, "SLC file")->required()->check(CLI::ExistingFile);
  cat_add->add_option("--id", acq_id, "Acquisition id (default S1_YYYYMMDD)");
  cat_add->add_option("--baseline", baseline, "Perpendicular orbit offset, meters");
  cat_add->add_option("--max-days", max_days, "Pairs longer than this are flagged as gaps");
  cat_add->callback([&] {
    action = [&] {
      stage = "catalog";
      run_stage(stage, [&] {
        Catalog cat = fs::exists(cat_path) ? load_catalog(cat_path) : Catalog{};
        const SlcHeader h = read_slc_header(slc_path);
        AcquisitionMeta a;
        a.date = Date::parse(h.acquisition_date);
        a.id = acq_id.empty() ? "S1_" + compact_date(a.date) : acq_id;
        a.wavelength_m = h.wavelength_m;
        a.incidence_deg = h.incidence_deg;
        a.slant_range_m = h.slant_range_m;
        const fs::path base = fs::absolute(cat_path).parent_path();
        a.slc_path = fs::absolute(slc_path).lexically_relative(base).generic_string();
        a.baseline_m = baseline;
        a.validate();
        for (const auto& e : cat.acquisitions)
          if (e.id == a.id) throw Error(Errc::DuplicateId, "acquisition id '" + a.id + "' already present");
        cat.acquisitions.push_back(a);
        cat.pairs = cat.acquisitions.size() >= 2 ? build_pairs(cat.acquisitions, max_days)
                                                 : std::vector<PairSpec>{};
        save_catalog(cat_path, cat);
      });
    };
  });
  std::string pairs_out;
  auto* cat_pairs = catalog->add_subcommand("pairs", "Rebuild consecutive master/slave pairs");
  cat_pairs->add_option("--catalog", cat_path, "Catalog JSON")->required()->check(CLI::ExistingFile);
  cat_pairs->add_option("--max-days", max_days, "Pairs longer than this are flagged as gaps");
  cat_pairs->add_option("--out", pairs_out, "Output catalog (default: rewrite in place)");
  cat_pairs->callback([&] {
    action = [&] {
      stage = "catalog";
      run_stage(stage, [&] {
        Catalog cat = load_catalog(cat_path);
        cat.pairs = build_pairs(cat.acquisitions, max_days);
        save_catalog(pairs_out.empty() ? cat_path : pairs_out, cat);
        json list = json::array();
        for (const auto& p : cat.pairs) list.push_back(pair_to_json(p));
        std::cout << list.dump(2) << '\n';
      });
    };
  });
  QueryArgs cat_q, top_q;
  auto query_action = [&](const QueryArgs& q) {
    return [&] {
      stage = "catalog";
      run_stage(stage, [&] {
        std::cout << asf_query_url(query_from(q.config, q.bbox, q.start, q.end, q.platform, q.level))
                  << '\n';
      });
    };
  };
  auto* cat_url = catalog->add_subcommand("query-url", "Print the ASF search URL for a query");
  add_query_options(cat_url, cat_q);
  cat_url->callback([&] { action = query_action(cat_q); });
  auto* url = app.add_subcommand("query-url", "Print the ASF search URL for a query");
  add_query_options(url, top_q);
  url->callback([&] { action = query_action(top_q); });

  // ifg
  Common ifg_c;
  std::string master, slave, dem_path, ifg_catalog;
  double bperp = 0.0;
  auto* ifg = app.add_subcommand("ifg", "Form, correct, and filter interferograms");
  add_common(ifg, ifg_c, true);
  ifg->add_option("--master", master, "Master SLC")->check(CLI::ExistingFile);
  ifg->add_option("--slave", slave, "Slave SLC")->check(CLI::ExistingFile);
  ifg->add_option("--bperp", bperp, "Perpendicular baseline slave minus master, meters");
  ifg->add_option("--catalog", ifg_catalog, "Process every pair of a catalog instead")
      ->check(CLI::ExistingFile)
      ->excludes("--master")
      ->excludes("--slave")
      ->excludes("--bperp");
  ifg->add_option("--dem", dem_path, "DEM raster (.r64) for topographic phase removal")
      ->check(CLI::ExistingFile);
  ifg->callback([&] {
    action = [&] {
      stage = "ifg";
      run_stage(stage, [&] {
        const auto cfg = processing_config(ifg_c);
        std::optional<RealRaster> dem;
        if (!dem_path.empty()) dem = load_real(dem_path);
        if (!ifg_catalog.empty()) {
          const auto stack = workflow::load_stack(ifg_catalog);
          const auto pairs = build_pairs(stack.acquisitions, 1 << 30);
          std::vector<pipeline::PairProducts> products(pairs.size());
          parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
            products[k] = pipeline::form_pair(stack.slcs[k], stack.slcs[k + 1], pairs[k],
                                              stack.acquisitions[k], dem ? &*dem : nullptr, cfg);
            pipeline::check_interferogram(products[k].ifg);
          });
          for (std::size_t k = 0; k < pairs.size(); ++k)
            workflow::write_pair_products(fs::path(ifg_c.out) / workflow::pair_dir_name(k, pairs[k]),
                                          products[k], stack.acquisitions[k]);
          return;
        }
        if (master.empty() || slave.empty())
          throw Error(Errc::InvalidArgument, "--master and --slave (or --catalog) are required");
        const SlcHeader hm = read_slc_header(master), hs = read_slc_header(slave);
        AcquisitionMeta am{"master", Date::parse(hm.acquisition_date), hm.wavelength_m,
                           hm.incidence_deg, hm.slant_range_m, master, 0.0};
        AcquisitionMeta as{"slave", Date::parse(hs.acquisition_date), hs.wavelength_m,
                           hs.incidence_deg, hs.slant_range_m, slave, bperp};
        am.id = "S1_" + compact_date(am.date);
        as.id = "S1_" + compact_date(as.date);
        const auto pairs = build_pairs({am, as}, 1 << 30);
        if (pairs.front().master_id != am.id)
          throw Error(Errc::InvalidArgument, "master must be acquired before slave");
        const auto products = pipeline::form_pair(load_slc(master), load_slc(slave), pairs.front(),
                                                  am, dem ? &*dem : nullptr, cfg);
        pipeline::check_interferogram(products.ifg);
        workflow::write_pair_products(ifg_c.out, products, am);
      });
    };
  });

  // unwrap
  Common unw_c;
  std::string unw_in, unw_method = "mcf", unw_ref = "auto", unw_line;
  std::optional<double> coh_mask;
  auto* unw = app.add_subcommand("unwrap", "Unwrap interferograms (minimum-cost flow or quality-guided)");
  add_common(unw, unw_c, false);
  unw->get_option("--out")->description("Output directory, or an .r64 file for a single pair (default: in place)");
  unw->add_option("--ifg", unw_in, "Pair directory or directory of pair directories")
      ->required()
      ->check(CLI::ExistingDirectory);
  unw->add_option("--method", unw_method, "mcf|quality")->check(CLI::IsMember({"mcf", "quality"}));
  unw->add_option("--coh-mask", coh_mask, "Coherence below this is masked (default 0.3)")
      ->check(CLI::Range(0.0, 1.0));
  unw->add_option("--ref", unw_ref, "auto|ROW,COL|none: keep only the component holding this pixel");
  unw->add_option("--line", unw_line, "Structure polyline excluded from automatic reference")
      ->check(CLI::ExistingFile);
  unw->callback([&] {
    action = [&] {
      stage = "unwrap";
      run_stage(stage, [&] {
        auto cfg = processing_config(unw_c);
        cfg.method = pipeline::unwrap_method_from_string(unw_method);
        if (coh_mask) cfg.coherence_mask = *coh_mask;
        auto pairs = workflow::load_pairs(unw_in);
        std::optional<Pixel> anchor;
        if (unw_ref == "auto")
          anchor = workflow::auto_reference(pairs, line_pixels(unw_line, pairs.front().products.ifg.meta));
        else if (unw_ref != "none")
          anchor = workflow::parse_pixel(unw_ref);
        std::vector<RealRaster> out(pairs.size());
        parallel_for(pairs.size(), cfg.threads,
                     [&](std::size_t k) { out[k] = pipeline::unwrap_pair(pairs[k].products, cfg, anchor); });
        if (pairs.size() == 1 && fs::path(unw_c.out).extension() == ".r64") {
          save_real(unw_c.out, out.front());
          return;
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          fs::path dir = pairs[k].dir;
          if (!unw_c.out.empty()) {
            dir = pairs.size() == 1 ? fs::path(unw_c.out) : fs::path(unw_c.out) / pairs[k].dir.filename();
            fs::create_directories(dir);
            for (const char* f : {"pair.json", "phase.r64", "phase.r64.json", "coherence.r64",
                                  "coherence.r64.json"})
              if (!fs::equivalent(pairs[k].dir, dir))
                fs::copy_file(pairs[k].dir / f, dir / f, fs::copy_options::overwrite_existing);
          }
          save_real(dir / "unwrapped.r64", out[k]);
        }
      });
    };
  });

  // series
  Common ser_c;
  std::string ser_pairs, ser_ref = "auto", ser_line;
  auto* series = app.add_subcommand("series", "Assemble cumulative LOS displacement series");
  add_common(series, ser_c, true);
  series->add_option("--pairs-dir", ser_pairs, "Directory of unwrapped pair directories")
      ->required()
      ->check(CLI::ExistingDirectory);
  series->add_option("--ref", ser_ref, "auto|ROW,COL reference pixel");
  series->add_option("--line", ser_line, "Structure polyline excluded from automatic reference")
      ->check(CLI::ExistingFile);
  series->callback([&] {
    action = [&] {
      stage = "series";
      run_stage(stage, [&] {
        const auto pairs = workflow::load_pairs(ser_pairs);
        const Pixel ref = ser_ref == "auto"
                              ? workflow::auto_reference(pairs, line_pixels(ser_line, pairs.front().products.ifg.meta))
                              : workflow::parse_pixel(ser_ref);
        save_series(ser_c.out, workflow::series_from_pairs(pairs, ref));
      });
    };
  });

  // profile
  Common prof_c;
  std::string prof_series, prof_line;
  auto* profile = app.add_subcommand("profile", "Extract displacement along a polyline");
  add_common(profile, prof_c, true);
  profile->add_option("--series", prof_series, "Series directory")->required()->check(CLI::ExistingDirectory);
  profile->add_option("--line", prof_line, "GeoJSON LineString")->required()->check(CLI::ExistingFile);
  profile->callback([&] {
    action = [&] {
      stage = "profile";
      run_stage(stage, [&] {
        const auto s = load_series(prof_series);
        const auto p = extract_profile(s, load_geojson_line(prof_line));
        const fs::path out = prof_c.out;
        export_profile(out, p, out.extension() == ".json" ? ProfileFormat::Json : ProfileFormat::Csv);
      });
    };
  });

  // ps
  Common ps_c;
  std::string ps_stack, ps_series, ps_truth, ps_line;
  double ps_threshold = ps::kDefaultThreshold;
  auto* psc = app.add_subcommand("ps", "Select persistent-scatterer candidates");
  add_common(psc, ps_c, true);
  psc->add_option("--stack", ps_stack, "Catalog JSON of the SLC stack")->required()->check(CLI::ExistingFile);
  psc->add_option("--threshold", ps_threshold, "Amplitude dispersion threshold")->check(CLI::Range(0.0, 10.0));
  psc->add_option("--series", ps_series, "Series directory to compare against")->check(CLI::ExistingDirectory);
  psc->add_option("--truth", ps_truth, "Synthetic output directory with truth rasters")
      ->check(CLI::ExistingDirectory);
  psc->add_option("--line", ps_line, "Restrict the comparison to PS on this polyline")->check(CLI::ExistingFile);
  psc->callback([&] {
    action = [&] {
      stage = "ps";
      run_stage(stage, [&] {
        const auto stack = workflow::load_stack(ps_stack);
        const RealRaster da = ps::amplitude_dispersion(stack.slcs);
        const auto candidates = ps::select_ps(da, ps_threshold);
        json doc{{"threshold", ps_threshold}, {"candidates", ps::to_json(candidates)}};
        if (!ps_series.empty() && !ps_truth.empty()) {
          const auto s = load_series(ps_series);
          const auto truth = workflow::load_truth(ps_truth);
          std::vector<RealRaster> ref;
          for (const auto& r : truth.cumulative_mm) {
            RealRaster c(r.meta(), RasterKind::DisplacementMm, RealRaster::kNoData);
            for (std::size_t i = 0; i < r.size(); ++i)
              if (!r.masked(i)) c.set(i, r[i] - r.at(s.reference_pixel));
            ref.push_back(std::move(c));
          }
          std::vector<Pixel> on_line;
          if (!ps_line.empty()) on_line = line_pixels(ps_line, s.meta);
          doc["comparison"] = ps::to_json(
              ps::compare_ps_dinsar(s, candidates, ref, ps_line.empty() ? nullptr : &on_line));
        } else if (!ps_series.empty() || !ps_truth.empty()) {
          throw Error(Errc::InvalidArgument, "--series and --truth must be given together");
        }
        write_json(ps_c.out, doc);
      });
    };
  });

  // alert
  Common al_c;
  std::string al_profile;
  double al_rate = trend::kDefaultRateThreshold, al_rmse = trend::kDefaultRmseThreshold;
  auto* alert = app.add_subcommand("alert", "Fit per-sample trends along a profile and flag anomalies");
  add_common(alert, al_c, true);
  alert->add_option("--profile", al_profile, "Profile CSV or JSON")->required()->check(CLI::ExistingFile);
  alert->add_option("--rate", al_rate, "Rate threshold, mm/yr")->check(CLI::NonNegativeNumber);
  alert->add_option("--rmse", al_rmse, "Residual RMSE threshold, mm")->check(CLI::NonNegativeNumber);
  alert->callback([&] {
    action = [&] {
      stage = "alert";
      run_stage(stage, [&] {
        const auto alerts = trend::alert_scan(import_profile(al_profile), al_rate, al_rmse);
        write_json(al_c.out, trend::to_json(alerts, al_rate, al_rmse));
      });
    };
  });

  // demo
  Common demo_c;
  auto* demo = app.add_subcommand("demo", "Run the bridge scenario end to end");
  add_common(demo, demo_c, true);
  demo->callback([&] {
    action = [&] {
      stage = "demo";
      workflow::DemoOptions opt;
      opt.out = demo_c.out;
      opt.seed = demo_c.seed;
      opt.threads = demo_c.threads;
      opt.processing = run_stage("config", [&] { return processing_config(demo_c); });
      const auto s = workflow::run_demo(opt);
      std::printf(
          "reference (%d,%d); peak (%d,%d): recovered %.3f mm, truth %.3f mm, rate %.3f mm/yr; "
          "%zu epochs, %zu profile samples, %zu alerts\n",
          s.reference.row, s.reference.col, s.peak_pixel.row, s.peak_pixel.col, s.peak_recovered_mm,
          s.peak_truth_mm, s.peak_rate_mm_yr, s.epochs, s.profile_samples, s.alerts);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    report_error(stage, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const StageError& e) {
    report_error(e.stage(), std::string(errc_name(e.code())), e.what());
    return exit_code(e.code());
  } catch (const Error& e) {
    report_error(stage, std::string(errc_name(e.code())), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report_error(stage, "internal", e.what());
    return kExitContract;
  }
}
