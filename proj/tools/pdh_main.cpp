// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
//
// Command-line driver for the probabilistic deep hashing pipeline:
//   synth -> train -> encode -> query/eval, plus the oracle selftest.
// Every command funnels its randomness through one --seed flag and writes a
// manifest next to each output, so equal manifests mean byte-equal outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "pdh/error.hpp"
#include "pdh/eval.hpp"
#include "pdh/io.hpp"
#include "pdh/model.hpp"
#include "pdh/rng.hpp"
#include "pdh/selftest.hpp"
#include "pdh/sigmoid.hpp"
#include "pdh/trainer.hpp"
#include "pdh/version.hpp"

namespace {

using pdh::io::fnv1a_file;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct SynthOpts {
    uint32_t classes = 10;
    uint32_t per_class = 200;
    uint32_t dim = 2;
    double spread = 10.0;
    uint64_t seed = 1;
    std::string out;
};

// Gaussian class blobs with unit sigma: centers on a circle of radius
// --spread (first two axes) for dim >= 2, evenly spaced on a line for
// dim 1. Samples are mapped into [0,1]^dim by a fixed affine computed from
// the generating parameters (not the sample), so datasets drawn with
// different seeds share one coordinate frame; the rare >4.5-sigma tail is
// clipped. The exact normalized world is written next to the dataset for
// oracle use.
void cmd_synth(const SynthOpts& opt) {
    std::vector<std::vector<double>> centers(opt.classes, std::vector<double>(opt.dim, 0.0));
    for (uint32_t c = 0; c < opt.classes; ++c) {
        if (opt.dim == 1) {
            centers[c][0] = opt.spread * static_cast<double>(c);
        } else {
            const double angle = 2.0 * M_PI * c / opt.classes;
            centers[c][0] = opt.spread * std::cos(angle);
            centers[c][1] = opt.spread * std::sin(angle);
        }
    }

    constexpr double kMargin = 4.5;  // sigma = 1; tails beyond are clipped
    std::vector<double> lo(opt.dim), range(opt.dim);
    for (uint32_t a = 0; a < opt.dim; ++a) {
        double cmin = centers[0][a];
        double cmax = centers[0][a];
        for (const auto& c : centers) {
            cmin = std::min(cmin, c[a]);
            cmax = std::max(cmax, c[a]);
        }
        lo[a] = cmin - kMargin;
        range[a] = (cmax + kMargin) - lo[a];
    }

    pdh::Rng rng(opt.seed);
    pdh::LabeledDataset ds;
    ds.flat = true;
    ds.shape = pdh::TensorShape{1, 1, opt.dim};
    ds.num_classes = opt.classes;
    for (uint32_t c = 0; c < opt.classes; ++c) {
        for (uint32_t s = 0; s < opt.per_class; ++s) {
            std::vector<double> x(opt.dim);
            for (uint32_t a = 0; a < opt.dim; ++a) {
                const double raw = centers[c][a] + rng.normal();
                x[a] = std::clamp((raw - lo[a]) / range[a], 0.0, 1.0);
            }
            ds.images.push_back(std::move(x));
            ds.labels.push_back(static_cast<uint16_t>(c));
        }
    }
    pdh::io::write_dataset(opt.out, ds);

    nlohmann::json world;
    world["kind"] = "gaussian-blobs";
    world["dim"] = opt.dim;
    world["classes"] = opt.classes;
    world["per_class"] = opt.per_class;
    world["spread"] = opt.spread;
    world["seed"] = opt.seed;
    for (uint32_t a = 0; a < opt.dim; ++a) {
        world["normalization"]["offset"].push_back(lo[a]);
        world["normalization"]["scale"].push_back(range[a]);
        world["sigma"].push_back(1.0 / range[a]);
    }
    for (const auto& c : centers) {
        nlohmann::json jc = nlohmann::json::array();
        for (uint32_t a = 0; a < opt.dim; ++a) {
            jc.push_back((c[a] - lo[a]) / range[a]);
        }
        world["centers"].push_back(jc);
    }
    pdh::io::write_text_file(opt.out + ".world.json", world.dump(2) + "\n");

    pdh::io::write_manifest(opt.out, "synth",
                            {{"flag.classes", std::to_string(opt.classes)},
                             {"flag.per-class", std::to_string(opt.per_class)},
                             {"flag.dim", std::to_string(opt.dim)},
                             {"flag.spread", fmt_double(opt.spread)},
                             {"flag.out", opt.out},
                             {"seed", std::to_string(opt.seed)}});
    std::cout << "wrote " << ds.size() << " samples to " << opt.out << "\n";
}

struct DataArgs {
    std::string data;
    std::string mnist_images;
    std::string mnist_labels;
};

pdh::LabeledDataset load_data(const DataArgs& args,
                              std::vector<std::pair<std::string, std::string>>& manifest) {
    if (!args.data.empty()) {
        manifest.emplace_back("input.data.fnv1a", fmt_hex(fnv1a_file(args.data)));
        return pdh::io::read_dataset(args.data);
    }
    if (args.mnist_images.empty() || args.mnist_labels.empty()) {
        throw std::invalid_argument("either --data or both --mnist-images/--mnist-labels needed");
    }
    manifest.emplace_back("input.mnist-images.fnv1a", fmt_hex(fnv1a_file(args.mnist_images)));
    manifest.emplace_back("input.mnist-labels.fnv1a", fmt_hex(fnv1a_file(args.mnist_labels)));
    return pdh::io::read_mnist_idx(args.mnist_images, args.mnist_labels);
}

struct TrainOpts {
    DataArgs data;
    std::string arch = "mlp-small";
    uint32_t bits = 12;
    double lr = 0.0025;
    double momentum = 0.9;
    uint32_t epochs = 20;
    uint32_t shift = 0;
    bool flip = false;
    uint64_t seed = 0;
    std::string out_model;
};

pdh::ModelConfig make_arch(const std::string& arch, const pdh::LabeledDataset& ds,
                           uint32_t bits) {
    if (arch == "mlp-small") {
        return pdh::ModelConfig::mlp_small(ds.shape.size(), bits);
    }
    if (arch == "conv-small") {
        if (ds.flat) {
            throw std::invalid_argument("conv-small needs image-shaped data, got flat vectors");
        }
        return pdh::ModelConfig::conv_small(ds.shape.h, ds.shape.w, ds.shape.c, bits);
    }
    throw std::invalid_argument("unknown arch: " + arch);
}

void cmd_train(const TrainOpts& opt) {
    std::vector<std::pair<std::string, std::string>> manifest = {
        {"flag.arch", opt.arch},
        {"flag.bits", std::to_string(opt.bits)},
        {"flag.lr", fmt_double(opt.lr)},
        {"flag.momentum", fmt_double(opt.momentum)},
        {"flag.epochs", std::to_string(opt.epochs)},
        {"flag.shift", std::to_string(opt.shift)},
        {"flag.flip", opt.flip ? "true" : "false"},
        {"flag.out-model", opt.out_model},
        {"seed", std::to_string(opt.seed)},
    };
    const pdh::LabeledDataset ds = load_data(opt.data, manifest);
    const pdh::ModelConfig mcfg = make_arch(opt.arch, ds, opt.bits);

    pdh::TrainConfig tcfg;
    tcfg.code_bits = opt.bits;
    tcfg.sgd.learning_rate = opt.lr;
    tcfg.sgd.momentum = opt.momentum;
    tcfg.epochs = opt.epochs;
    tcfg.shift_pixels = opt.shift;
    tcfg.horizontal_flip = opt.flip;
    tcfg.seed = opt.seed;

    const pdh::TrainResult result = pdh::train(ds, mcfg, tcfg);
    pdh::io::write_checkpoint(opt.out_model, mcfg, result.params);

    std::string history;
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
        history += std::to_string(i);
        history += '\t';
        history += fmt_double(result.loss_history[i]);
        history += '\n';
    }
    pdh::io::write_text_file(opt.out_model + ".loss.txt", history);
    pdh::io::write_manifest(opt.out_model, "train", std::move(manifest));
    std::cout << "trained " << result.loss_history.size() << " batches, final loss "
              << fmt_double(result.loss_history.back()) << ", wrote " << opt.out_model << "\n";
}

struct EncodeOpts {
    std::string model;
    DataArgs data;
    std::string out_codes;
};

void cmd_encode(const EncodeOpts& opt) {
    std::vector<std::pair<std::string, std::string>> manifest = {
        {"flag.model", opt.model},
        {"flag.out-codes", opt.out_codes},
        {"input.model.fnv1a", fmt_hex(fnv1a_file(opt.model))},
    };
    const pdh::io::Checkpoint ckpt = pdh::io::read_checkpoint(opt.model);
    const pdh::LabeledDataset ds = load_data(opt.data, manifest);
    if (ckpt.config.input.size() != ds.shape.size()) {
        throw pdh::DataError("encode: model expects input size " +
                             std::to_string(ckpt.config.input.size()) + ", dataset has " +
                             std::to_string(ds.shape.size()));
    }

    pdh::CodeBook book(ckpt.config.code_bits);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto logits = pdh::forward(ckpt.config, ckpt.params, ds.images[i]);
        book.add(i, ds.labels[i], pdh::binarize(pdh::posteriors(logits)));
    }
    pdh::io::write_codebook(opt.out_codes, book);
    pdh::io::write_manifest(opt.out_codes, "encode", std::move(manifest));
    std::cout << "encoded " << book.size() << " codes (" << ckpt.config.code_bits
              << " bits) to " << opt.out_codes << "\n";
}

struct QueryOpts {
    std::string gallery_codes;
    std::string query_codes;
    uint32_t k = 10;
    std::string out;
};

void cmd_query(const QueryOpts& opt) {
    const pdh::CodeBook gallery = pdh::io::read_codebook(opt.gallery_codes);
    const pdh::CodeBook queries = pdh::io::read_codebook(opt.query_codes);
    if (gallery.bits() != queries.bits()) {
        throw pdh::DataError("query: gallery codes have " + std::to_string(gallery.bits()) +
                             " bits, query codes have " + std::to_string(queries.bits()));
    }
    std::string table = "query_id\trank\tid\tdistance\tlabel\n";
    for (const pdh::CodeEntry& q : queries.entries()) {
        const auto neighbors = pdh::search_topk(gallery, q.code, opt.k);
        for (std::size_t r = 0; r < neighbors.size(); ++r) {
            table += std::to_string(q.id) + '\t' + std::to_string(r + 1) + '\t' +
                     std::to_string(neighbors[r].id) + '\t' +
                     std::to_string(neighbors[r].distance) + '\t' +
                     std::to_string(neighbors[r].label) + '\n';
        }
    }
    pdh::io::write_text_file(opt.out, table);
    pdh::io::write_manifest(
        opt.out, "query",
        {{"flag.gallery-codes", opt.gallery_codes},
         {"flag.query-codes", opt.query_codes},
         {"flag.k", std::to_string(opt.k)},
         {"flag.out", opt.out},
         {"input.gallery-codes.fnv1a", fmt_hex(fnv1a_file(opt.gallery_codes))},
         {"input.query-codes.fnv1a", fmt_hex(fnv1a_file(opt.query_codes))}});
    std::cout << "wrote top-" << opt.k << " neighbors for " << queries.size() << " queries to "
              << opt.out << "\n";
}

struct EvalOpts {
    std::string gallery_codes;
    std::string query_codes;
    std::vector<uint32_t> k_list = {100, 200, 400, 600, 800, 1000};
    std::string out;
};

void cmd_eval(const EvalOpts& opt) {
    const pdh::CodeBook gallery = pdh::io::read_codebook(opt.gallery_codes);
    const pdh::CodeBook query_book = pdh::io::read_codebook(opt.query_codes);
    if (gallery.bits() != query_book.bits()) {
        throw pdh::DataError("eval: gallery codes have " + std::to_string(gallery.bits()) +
                             " bits, query codes have " + std::to_string(query_book.bits()));
    }
    std::vector<pdh::QueryItem> queries;
    queries.reserve(query_book.size());
    for (const pdh::CodeEntry& q : query_book.entries()) {
        queries.push_back(pdh::QueryItem{q.label, q.code});
    }
    const pdh::EvalReport report = pdh::evaluate(gallery, queries, opt.k_list);
    pdh::io::write_text_file(opt.out, pdh::report_key_values(report));
    std::string k_list_str;
    for (uint32_t k : opt.k_list) {
        k_list_str += (k_list_str.empty() ? "" : ",") + std::to_string(k);
    }
    pdh::io::write_manifest(
        opt.out, "eval",
        {{"flag.gallery-codes", opt.gallery_codes},
         {"flag.query-codes", opt.query_codes},
         {"flag.k-list", k_list_str},
         {"flag.out", opt.out},
         {"input.gallery-codes.fnv1a", fmt_hex(fnv1a_file(opt.gallery_codes))},
         {"input.query-codes.fnv1a", fmt_hex(fnv1a_file(opt.query_codes))}});
    std::cout << pdh::report_table(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic deep hashing: train, encode and search binary codes"};
    app.set_version_flag("--version", std::string(pdh::kArtifactVersion));
    app.require_subcommand(1);
    int exit_code = 0;

    SynthOpts synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a Gaussian-blob PDHD dataset");
    synth_cmd->add_option("--classes", synth.classes, "number of classes")
        ->check(CLI::Range(2u, 60000u))
        ->capture_default_str();
    synth_cmd->add_option("--per-class", synth.per_class, "samples per class")
        ->check(CLI::Range(2u, 1000000u))
        ->capture_default_str();
    synth_cmd->add_option("--dim", synth.dim, "feature dimension")
        ->check(CLI::Range(1u, 4096u))
        ->capture_default_str();
    synth_cmd->add_option("--spread", synth.spread, "class center separation (sigma = 1)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "rng seed")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "output dataset path")->required();
    synth_cmd->callback([&] { cmd_synth(synth); });

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train", "fit the likelihood estimator");
    train_cmd->add_option("--data", train_opts.data.data, "PDHD dataset");
    train_cmd->add_option("--mnist-images", train_opts.data.mnist_images, "IDX3 image file");
    train_cmd->add_option("--mnist-labels", train_opts.data.mnist_labels, "IDX1 label file");
    train_cmd->add_option("--arch", train_opts.arch, "mlp-small | conv-small")
        ->check(CLI::IsMember({"mlp-small", "conv-small"}))
        ->capture_default_str();
    train_cmd->add_option("--bits", train_opts.bits, "code length n")
        ->check(CLI::Range(1u, 4096u))
        ->capture_default_str();
    train_cmd->add_option("--lr", train_opts.lr, "learning rate")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    train_cmd->add_option("--momentum", train_opts.momentum, "momentum in [0,1)")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_opts.epochs, "training epochs")
        ->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();
    train_cmd->add_option("--shift", train_opts.shift, "augmentation shift in pixels (0..4)")
        ->check(CLI::Range(0u, 4u))
        ->capture_default_str();
    train_cmd->add_flag("--flip", train_opts.flip, "enable horizontal flip augmentation");
    train_cmd->add_option("--seed", train_opts.seed, "rng seed")->capture_default_str();
    train_cmd->add_option("--out-model", train_opts.out_model, "checkpoint path")->required();
    train_cmd->callback([&] { cmd_train(train_opts); });

    EncodeOpts encode;
    auto* encode_cmd = app.add_subcommand("encode", "binarize a dataset into hash codes");
    encode_cmd->add_option("--model", encode.model, "PDHM checkpoint")->required();
    encode_cmd->add_option("--data", encode.data.data, "PDHD dataset");
    encode_cmd->add_option("--mnist-images", encode.data.mnist_images, "IDX3 image file");
    encode_cmd->add_option("--mnist-labels", encode.data.mnist_labels, "IDX1 label file");
    encode_cmd->add_option("--out-codes", encode.out_codes, "PDHC output path")->required();
    encode_cmd->callback([&] { cmd_encode(encode); });

    QueryOpts query;
    auto* query_cmd = app.add_subcommand("query", "top-k Hamming search against a gallery");
    query_cmd->add_option("--gallery-codes", query.gallery_codes, "PDHC gallery")->required();
    query_cmd->add_option("--query-codes", query.query_codes, "PDHC queries")->required();
    query_cmd->add_option("--k", query.k, "neighbors per query")
        ->check(CLI::Range(1u, 10000000u))
        ->capture_default_str();
    query_cmd->add_option("--out", query.out, "output table path")->required();
    query_cmd->callback([&] { cmd_query(query); });

    EvalOpts eval_opts;
    auto* eval_cmd = app.add_subcommand("eval", "mAP / precision@k over gallery and queries");
    eval_cmd->add_option("--gallery-codes", eval_opts.gallery_codes, "PDHC gallery")->required();
    eval_cmd->add_option("--query-codes", eval_opts.query_codes, "PDHC queries")->required();
    eval_cmd->add_option("--k-list", eval_opts.k_list, "precision@k cutoffs")
        ->delimiter(',')
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_opts.out, "report path (key=value)")->required();
    eval_cmd->callback([&] { cmd_eval(eval_opts); });

    std::string level = "fast";
    uint64_t selftest_seed = 2024;
    bool inject_sigmoid_fault = false;
    auto* selftest_cmd = app.add_subcommand("selftest", "run the oracle property suite");
    selftest_cmd->add_option("--level", level, "fast | full")
        ->check(CLI::IsMember({"fast", "full"}))
        ->capture_default_str();
    selftest_cmd->add_option("--seed", selftest_seed, "rng seed")->capture_default_str();
    selftest_cmd
        ->add_flag("--inject-sigmoid-fault", inject_sigmoid_fault,
                   "fault-injection hook: tamper the sigmoid under test")
        ->group("");  // hidden; exists so tests can prove the suite can fail
    selftest_cmd->callback([&] {
        pdh::selftest::Options options;
        options.full = level == "full";
        options.seed = selftest_seed;
        if (inject_sigmoid_fault) {
            options.sigmoid = [](double x) { return pdh::stable_sigmoid(x) * 1.001; };
        }
        const int failures = pdh::selftest::run(options);
        std::cout << (failures == 0 ? "selftest: all properties passed\n"
                                    : "selftest: " + std::to_string(failures) +
                                          " propert(ies) FAILED\n");
        exit_code = failures == 0 ? 0 : 3;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const pdh::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
