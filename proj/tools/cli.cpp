#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "vrph/engine.hpp"
#include "vrph/io.hpp"

namespace vrph::cli {

namespace {

// Bad flag values found after parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(const std::string& text, const std::string& what) {
    double x = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc() || ptr != end) throw UsageError(what + ": '" + text + "' is not a number");
    return x;
}

std::optional<value_t> parse_threshold(const std::string& text) {
    if (text == "auto") return std::nullopt;
    const double t = parse_number(text, "--threshold");
    if (std::isnan(t)) throw UsageError("--threshold: NaN is not a threshold");
    return t;
}

DtmWeights parse_weight_params(const std::string& text) {
    DtmWeights dtm;
    if (text.empty()) return dtm;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--weight-params: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "k") {
            const double k = parse_number(value, "--weight-params k");
            if (!(k >= 1) || k != std::floor(k)) throw UsageError("--weight-params: k must be a positive integer");
            dtm.neighbors = static_cast<std::size_t>(k);
        } else if (key == "r") {
            dtm.exponent = parse_number(value, "--weight-params r");
            if (!(dtm.exponent > 0)) throw UsageError("--weight-params: r must be positive");
        } else if (key == "p") {
            const double p = value == "inf" ? kInfinity : parse_number(value, "--weight-params p");
            try {
                dtm.mix = parse_mix_exponent(p);
            } catch (const Error& e) {
                throw UsageError(std::string("--weight-params: ") + e.what());
            }
        } else {
            throw UsageError("--weight-params: unknown key '" + key + "'");
        }
    }
    return dtm;
}

struct Options {
    std::string input;
    unsigned dim = 1;
    std::string threshold = "auto";
    unsigned modulus = 2;
    unsigned threads = default_thread_count();
    bool collapse = false;
    std::string format;
    std::string weights;
    std::string weight_params;
    std::string convention = "vr-compatible";
    std::string output;
    std::string barcode_format = "csv";
    bool stats = false;
    bool pin = false;
    unsigned repeat = 3;
};

void add_pipeline_options(CLI::App& app, Options& o) {
    app.add_option("--dim", o.dim, "Top homology dimension")->capture_default_str();
    app.add_option("--threshold", o.threshold, "Filtration cutoff, or 'auto' for the enclosing radius")
        ->capture_default_str();
    app.add_option("--modulus", o.modulus, "Prime coefficient field")->capture_default_str();
    app.add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--collapse", o.collapse, "Edge-collapse the graph before reducing");
    app.add_option("--format", o.format, "Input format, inferred from the extension by default")
        ->check(CLI::IsMember({"lower-distance", "point-cloud", "sparse"}));
    app.add_option("--weights", o.weights, "Vertex weighting")->check(CLI::IsMember({"dtm"}));
    app.add_option("--weight-params", o.weight_params, "DTM parameters: k=<int>,r=<real>,p=1|2|inf");
    app.add_option("--weight-convention", o.convention, "Edge value rule for weighted inputs")
        ->capture_default_str()
        ->check(CLI::IsMember({"vr-compatible", "dtm-strict"}));
    app.add_flag("--stats", o.stats, "Print pipeline statistics to standard error as key=value lines");
    app.add_flag("--pin", o.pin, "Pin worker threads to CPUs");
}

ComputeParams make_params(const Options& o) {
    ComputeParams params;
    params.max_dim = o.dim;
    params.threshold = parse_threshold(o.threshold);
    params.modulus = o.modulus;
    params.threads = o.threads;
    params.collapse = o.collapse;
    params.pin_threads = o.pin;
    if (!o.weight_params.empty() && o.weights.empty()) throw UsageError("--weight-params needs --weights dtm");
    if (o.weights == "dtm") params.weighting = parse_weight_params(o.weight_params);
    params.convention = o.convention == "dtm-strict" ? WeightConvention::dtm_strict : WeightConvention::vr_compatible;
    try {
        params.validate();
        build_field_table(params.modulus);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return params;
}

InputFormat input_format(const Options& o) {
    try {
        return o.format.empty() ? infer_input_format(o.input) : parse_input_format(o.format);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

PipelineReport run_once(Engine& engine, const LoadedInput& loaded, const ComputeParams& params) {
    if (const auto* cloud = std::get_if<PointCloud>(&loaded.data)) return engine.compute(*cloud, params);
    return engine.compute(std::get<DistanceInput>(loaded.data), params);
}

int compute_command(const Options& o, std::ostream& out, std::ostream& err) {
    const ComputeParams params = make_params(o);
    const InputFormat format = input_format(o);
    const LoadedInput loaded = read_input_file(o.input, format);
    Engine engine(params.threads, params.pin_threads);
    const PipelineReport report = run_once(engine, loaded, params);

    const BarcodeFormat barcode_format = o.barcode_format == "human" ? BarcodeFormat::human : BarcodeFormat::csv;
    if (o.output.empty()) {
        write_barcode(report.barcode, out, barcode_format);
    } else {
        std::ofstream file(o.output);
        if (!file) throw Error(ErrorKind::io_error, "cannot write '" + o.output + "'");
        write_barcode(report.barcode, file, barcode_format);
    }
    if (o.stats)
        for (const auto& [key, value] : report.stats.entries()) err << key << '=' << value << '\n';
    return 0;
}

int bench_command(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.repeat == 0) throw UsageError("--repeat must be positive");
    const ComputeParams params = make_params(o);
    const InputFormat format = input_format(o);

    const auto start = std::chrono::steady_clock::now();
    const LoadedInput loaded = read_input_file(o.input, format);
    const double read_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Engine engine(params.threads, params.pin_threads);
    const std::vector<std::string> stages = {"validate", "weighting", "threshold", "collapse", "reduction", "total"};
    std::map<std::string, std::vector<double>> samples;
    PipelineReport report;
    for (unsigned t = 0; t < o.repeat; ++t) {
        report = run_once(engine, loaded, params);
        const auto& s = report.stats.times;
        samples["validate"].push_back(s.validate);
        samples["weighting"].push_back(s.weighting);
        samples["threshold"].push_back(s.threshold);
        samples["collapse"].push_back(s.collapse);
        samples["reduction"].push_back(s.reduction);
        samples["total"].push_back(s.total);
    }
    out << "stage,min_seconds,median_seconds\n";
    out << "read," << format_value(read_time) << ',' << format_value(read_time) << '\n';
    for (const auto& stage : stages) {
        auto& v = samples[stage];
        std::sort(v.begin(), v.end());
        const double median = v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
        out << stage << ',' << format_value(v.front()) << ',' << format_value(median) << '\n';
    }
    if (o.stats)
        for (const auto& [key, value] : report.stats.entries()) err << key << '=' << value << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Persistence barcodes of Vietoris-Rips and flag filtrations.", "vrph"};
    app.add_option("input", o.input, "Input file");
    add_pipeline_options(app, o);
    app.add_option("--output", o.output, "Write the barcode here instead of standard output");
    app.add_option("--barcode-format", o.barcode_format, "Barcode output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "human"}));

    auto* bench = app.add_subcommand("bench", "Run the pipeline repeatedly and report per-stage times");
    bench->add_option("file", o.input, "Input file")->required();
    bench->add_option("--repeat", o.repeat, "Number of runs")->capture_default_str();
    bench->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (!bench->parsed() && o.input.empty()) throw CLI::RequiredError("input");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        return bench->parsed() ? bench_command(o, out, err) : compute_command(o, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace vrph::cli
