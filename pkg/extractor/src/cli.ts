#!/usr/bin/env node
/** CLI: initialize a model file, then extract layered embedding directories
 * under the NC / RC / CC configurations. */

import * as fs from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { TinyEncoder } from "./model.js";
import { controlledContexts, extractInContext, extractNc,
         randomContexts } from "./extract.js";
import { readLines, readTemplateIndex, writeEmbeddingDirectory } from "./formats.js";

function loadModel(modelPath: string): TinyEncoder {
    return TinyEncoder.load(JSON.parse(fs.readFileSync(modelPath, "utf-8")));
}

function truncateLayers<T>(layers: T[], maxLayers?: number): T[] {
    // the manifest format numbers layers contiguously from zero, so a layer
    // range is restricted to prefixes
    if (maxLayers === undefined) return layers;
    if (maxLayers < 1 || maxLayers > layers.length) {
        throw new Error(`--max-layers must be in 1..${layers.length}`);
    }
    return layers.slice(0, maxLayers);
}

await yargs(hideBin(process.argv))
    .scriptName("chromalign-extract")
    .command(
        "init-model",
        "write a fresh seeded encoder to a JSON model file",
        (y) => y
            .option("out", { type: "string", demandOption: true })
            .option("dim", { type: "number", default: 32 })
            .option("depth", { type: "number", default: 2 })
            .option("heads", { type: "number", default: 2 })
            .option("max-len", { type: "number", default: 32 })
            .option("seed", { type: "number", default: 1 }),
        (argv) => {
            const model = TinyEncoder.init({
                dim: argv.dim, depth: argv.depth, heads: argv.heads,
                maxLen: argv.maxLen, seed: argv.seed,
            });
            fs.writeFileSync(argv.out, JSON.stringify(model.save()));
            console.log(`wrote model (dim=${model.dim}, ` +
                        `layers=${model.layerCount}) to ${argv.out}`);
        })
    .command(
        "extract",
        "extract per-layer term embeddings into a directory",
        (y) => y
            .option("model", { type: "string", demandOption: true })
            .option("config", { choices: ["NC", "RC", "CC"] as const,
                                demandOption: true })
            .option("model-id", { type: "string", default: "tiny-encoder" })
            .option("terms-file", { type: "string",
                                    describe: "term list (NC, RC)" })
            .option("index", { type: "string",
                               describe: "template index TSV (CC)" })
            .option("sentences", { type: "string",
                                   describe: "template sentences file (CC)" })
            .option("corpus", { type: "string",
                                describe: "context corpus, one sentence per line (RC)" })
            .option("contexts-per-term", { type: "number", default: 366,
                                           describe: "S for RC sampling" })
            .option("seed", { type: "number", describe: "RC sampling seed" })
            .option("batch-size", { type: "number", default: 32 })
            .option("max-layers", { type: "number",
                                    describe: "emit only the first N layers" })
            .option("out-dir", { type: "string", demandOption: true }),
        (argv) => {
            const model = loadModel(argv.model);
            let result;
            if (argv.config === "NC") {
                if (!argv.termsFile) throw new Error("NC requires --terms-file");
                result = extractNc(model, readLines(argv.termsFile));
            } else if (argv.config === "CC") {
                if (!argv.index || !argv.sentences) {
                    throw new Error("CC requires --index and --sentences");
                }
                const rows = readTemplateIndex(argv.index);
                const sentences = fs.readFileSync(argv.sentences, "utf-8")
                    .split("\n");
                result = extractInContext(
                    model, controlledContexts(rows, sentences), argv.batchSize);
            } else {
                if (!argv.corpus || !argv.termsFile) {
                    throw new Error("RC requires --corpus and --terms-file");
                }
                if (argv.seed === undefined) {
                    throw new Error("RC sampling requires --seed");
                }
                const contexts = randomContexts(
                    readLines(argv.corpus), readLines(argv.termsFile),
                    argv.contextsPerTerm, argv.seed);
                result = extractInContext(model, contexts, argv.batchSize);
            }
            const layers = truncateLayers(result.layers, argv.maxLayers);
            writeEmbeddingDirectory(argv.outDir, argv.modelId,
                                    argv.config as "NC" | "RC" | "CC", layers);
            const totalSkipped = [...result.skipped.values()]
                .reduce((a, b) => a + b, 0);
            if (totalSkipped > 0) {
                console.warn(`skipped ${totalSkipped} sentences without their ` +
                             `target term`);
            }
            console.log(`wrote ${layers.length} layers for ` +
                        `${layers[0].size} terms to ${argv.outDir}`);
        })
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
        console.error(msg ?? err?.message ?? "unknown error");
        process.exit(1);
    })
    .parseAsync();
