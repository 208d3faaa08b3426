/** Term-representation extraction under the three configurations.
 *
 * NC encodes the bare term between delimiter tokens. CC/RC encode sentences
 * containing the term, average the hidden states of the term's subword
 * tokens within each sentence, then mean-pool over the term's contexts.
 * Target localization works on whitespace word boundaries of the raw
 * sentence (terms are monolexemic and lowercase), so no tokenizer-specific
 * alignment heuristics are involved.
 */

import { TinyEncoder } from "./model.js";
import { Rng } from "./rng.js";
import { TemplateRow } from "./formats.js";

export type ExtractionConfig = "NC" | "RC" | "CC";

export interface ExtractionResult {
    /** One term -> vector map per layer (embedding layer first). */
    layers: Array<Map<string, number[]>>;
    /** Sentences whose target term never occurred, per term. */
    skipped: Map<string, number>;
}

function meanOf(rows: number[][]): number[] {
    const out = new Array(rows[0].length).fill(0);
    for (const row of rows) {
        for (let d = 0; d < row.length; d++) out[d] += row[d];
    }
    return out.map((v) => v / rows.length);
}

function addInto(acc: number[], row: number[]): void {
    for (let d = 0; d < row.length; d++) acc[d] += row[d];
}

/** Per-layer hidden states of the term's subwords, averaged over the span. */
function termStates(model: TinyEncoder, sentence: string,
                    term: string): number[][] | null {
    const words = sentence.trim().toLowerCase().split(/\s+/).filter((w) => w);
    const wordIdx = words.indexOf(term.toLowerCase());
    if (wordIdx === -1) return null;
    const { ids, wordSpans } = model.tokenizer.encode(sentence);
    const [start, end] = wordSpans[wordIdx];
    const perLayer = model.forward(ids);
    return perLayer.map((states) => meanOf(states.slice(start, end)));
}

/** No-context encoding: [CLS] term [SEP], subword states averaged. */
export function extractNc(model: TinyEncoder, terms: string[]): ExtractionResult {
    const layers: Array<Map<string, number[]>> =
        Array.from({ length: model.layerCount }, () => new Map());
    for (const term of terms) {
        const lower = term.toLowerCase();
        const { ids, wordSpans } = model.tokenizer.encode(lower);
        if (wordSpans.length !== 1) {
            throw new Error(`NC expects a single-word term, got ${JSON.stringify(term)}`);
        }
        const [start, end] = wordSpans[0];
        const perLayer = model.forward(ids);
        perLayer.forEach((states, layer) => {
            layers[layer].set(lower, meanOf(states.slice(start, end)));
        });
    }
    return { layers, skipped: new Map() };
}

/** Mean-pooled in-context encoding over each term's sentences. */
export function extractInContext(
    model: TinyEncoder,
    contexts: Map<string, string[]>,
    batchSize = 32,
): ExtractionResult {
    const layers: Array<Map<string, number[]>> =
        Array.from({ length: model.layerCount }, () => new Map());
    const skipped = new Map<string, number>();
    for (const [term, sentences] of contexts) {
        let pooled = 0;
        let missing = 0;
        const acc: Array<number[] | null> = Array(model.layerCount).fill(null);
        for (let start = 0; start < sentences.length; start += batchSize) {
            for (const sentence of sentences.slice(start, start + batchSize)) {
                const states = termStates(model, sentence, term);
                if (states === null) {
                    missing += 1;
                    continue;
                }
                pooled += 1;
                states.forEach((vec, layer) => {
                    if (acc[layer] === null) {
                        acc[layer] = [...vec];
                    } else {
                        addInto(acc[layer]!, vec);
                    }
                });
            }
        }
        if (missing > 0) skipped.set(term, missing);
        if (pooled === 0) {
            throw new Error(`no usable contexts for term ${JSON.stringify(term)}`);
        }
        acc.forEach((sum, layer) => {
            layers[layer].set(term.toLowerCase(), sum!.map((v) => v / pooled));
        });
    }
    return { layers, skipped };
}

/** Group template-index sentences by term for the CC configuration. */
export function controlledContexts(rows: TemplateRow[],
                                   sentences: string[]): Map<string, string[]> {
    const byTerm = new Map<string, string[]>();
    for (const row of rows) {
        if (row.lineNo < 1 || row.lineNo > sentences.length) {
            throw new Error(`index line_no ${row.lineNo} outside sentence file`);
        }
        const list = byTerm.get(row.term) ?? [];
        list.push(sentences[row.lineNo - 1]);
        byTerm.set(row.term, list);
    }
    return byTerm;
}

/** Sample S contexts per term from a corpus, uniform without replacement. */
export function randomContexts(
    corpus: string[],
    terms: string[],
    contextsPerTerm: number,
    seed: number,
): Map<string, string[]> {
    const byTerm = new Map<string, string[]>();
    for (const term of terms) {
        const lower = term.toLowerCase();
        const candidates: number[] = [];
        corpus.forEach((sentence, i) => {
            if (sentence.toLowerCase().split(/\s+/).includes(lower)) candidates.push(i);
        });
        if (candidates.length === 0) {
            throw new Error(`corpus has no sentence containing ${JSON.stringify(term)}`);
        }
        const take = Math.min(contextsPerTerm, candidates.length);
        const rng = new Rng((seed ^ hashTerm(lower)) >>> 0);
        const chosen = rng.sampleWithoutReplacement(candidates.length, take)
            .map((i) => candidates[i]).sort((a, b) => a - b);
        byTerm.set(lower, chosen.map((i) => corpus[i]));
    }
    return byTerm;
}

function hashTerm(term: string): number {
    let h = 2166136261;
    for (let i = 0; i < term.length; i++) {
        h ^= term.charCodeAt(i);
        h = Math.imul(h, 16777619);
    }
    return h >>> 0;
}
