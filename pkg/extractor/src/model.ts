/** A small self-contained transformer encoder with seeded weights.
 *
 * Deterministic by construction: weights come from a seeded PRNG and the
 * forward pass is plain number arithmetic, so repeated extraction runs are
 * bit-identical. forward() returns one hidden-state sequence per layer
 * including the embedding layer, i.e. depth + 1 entries.
 */

import { Rng } from "./rng.js";
import { DEFAULT_PIECES, Tokenizer } from "./tokenizer.js";

export interface ModelConfig {
    dim: number;
    depth: number;
    heads: number;
    maxLen: number;
    seed: number;
    vocab: string[];
}

type Matrix = number[][];

interface Block {
    wq: Matrix;
    wk: Matrix;
    wv: Matrix;
    wo: Matrix;
    ln1Gamma: number[];
    ln1Beta: number[];
    ffnW1: Matrix;
    ffnB1: number[];
    ffnW2: Matrix;
    ffnB2: number[];
    ln2Gamma: number[];
    ln2Beta: number[];
}

function matrix(rng: Rng, rows: number, cols: number, std: number): Matrix {
    return Array.from({ length: rows }, () =>
        Array.from({ length: cols }, () => rng.gaussian(0, std)));
}

function matvecRows(x: number[], w: Matrix): number[] {
    // x (in) * w (in x out)
    const out = new Array(w[0].length).fill(0);
    for (let i = 0; i < x.length; i++) {
        const xi = x[i];
        const row = w[i];
        for (let j = 0; j < row.length; j++) out[j] += xi * row[j];
    }
    return out;
}

function layerNorm(x: number[], gamma: number[], beta: number[]): number[] {
    const mean = x.reduce((a, b) => a + b, 0) / x.length;
    let variance = 0;
    for (const v of x) variance += (v - mean) * (v - mean);
    variance /= x.length;
    const inv = 1.0 / Math.sqrt(variance + 1e-5);
    return x.map((v, i) => gamma[i] * (v - mean) * inv + beta[i]);
}

function softmaxInPlace(scores: number[]): void {
    const max = Math.max(...scores);
    let total = 0;
    for (let i = 0; i < scores.length; i++) {
        scores[i] = Math.exp(scores[i] - max);
        total += scores[i];
    }
    for (let i = 0; i < scores.length; i++) scores[i] /= total;
}

function gelu(v: number): number {
    return 0.5 * v * (1 + Math.tanh(Math.sqrt(2 / Math.PI) * (v + 0.044715 * v ** 3)));
}

export class TinyEncoder {
    readonly config: ModelConfig;
    readonly tokenizer: Tokenizer;
    private tokenEmbedding: Matrix;
    private posEmbedding: Matrix;
    private blocks: Block[];

    private constructor(config: ModelConfig, tokenEmbedding: Matrix,
                        posEmbedding: Matrix, blocks: Block[]) {
        if (config.dim % config.heads !== 0) {
            throw new Error("dim must be divisible by heads");
        }
        this.config = config;
        this.tokenizer = new Tokenizer(config.vocab);
        this.tokenEmbedding = tokenEmbedding;
        this.posEmbedding = posEmbedding;
        this.blocks = blocks;
    }

    static init(options: Partial<ModelConfig> = {}): TinyEncoder {
        const config: ModelConfig = {
            dim: options.dim ?? 32,
            depth: options.depth ?? 2,
            heads: options.heads ?? 2,
            maxLen: options.maxLen ?? 32,
            seed: options.seed ?? 1,
            vocab: options.vocab ?? [...DEFAULT_PIECES],
        };
        const tokenizer = new Tokenizer(config.vocab);
        const vocabSize = tokenizer.vocab.length;
        const rng = new Rng(config.seed);
        const std = 1.0 / Math.sqrt(config.dim);
        const tokenEmbedding = matrix(rng, vocabSize, config.dim, 1.0);
        const posEmbedding = matrix(rng, config.maxLen, config.dim, 0.1);
        const blocks: Block[] = [];
        for (let layer = 0; layer < config.depth; layer++) {
            blocks.push({
                wq: matrix(rng, config.dim, config.dim, std),
                wk: matrix(rng, config.dim, config.dim, std),
                wv: matrix(rng, config.dim, config.dim, std),
                wo: matrix(rng, config.dim, config.dim, std),
                ln1Gamma: Array(config.dim).fill(1),
                ln1Beta: Array(config.dim).fill(0),
                ffnW1: matrix(rng, config.dim, 2 * config.dim, std),
                ffnB1: Array(2 * config.dim).fill(0),
                ffnW2: matrix(rng, 2 * config.dim, config.dim,
                              1.0 / Math.sqrt(2 * config.dim)),
                ffnB2: Array(config.dim).fill(0),
                ln2Gamma: Array(config.dim).fill(1),
                ln2Beta: Array(config.dim).fill(0),
            });
        }
        return new TinyEncoder(config, tokenEmbedding, posEmbedding, blocks);
    }

    save(): object {
        return {
            config: this.config,
            tokenEmbedding: this.tokenEmbedding,
            posEmbedding: this.posEmbedding,
            blocks: this.blocks,
        };
    }

    static load(data: any): TinyEncoder {
        for (const key of ["config", "tokenEmbedding", "posEmbedding", "blocks"]) {
            if (!(key in data)) throw new Error(`model file missing ${key}`);
        }
        return new TinyEncoder(data.config, data.tokenEmbedding,
                               data.posEmbedding, data.blocks);
    }

    /** Hidden size advertised to manifest writers. */
    get dim(): number {
        return this.config.dim;
    }

    /** Number of hidden-state sequences forward() yields (embeddings + blocks). */
    get layerCount(): number {
        return this.config.depth + 1;
    }

    private attention(states: Matrix, block: Block): Matrix {
        const { dim, heads } = this.config;
        const headDim = dim / heads;
        const scale = 1.0 / Math.sqrt(headDim);
        const q = states.map((x) => matvecRows(x, block.wq));
        const k = states.map((x) => matvecRows(x, block.wk));
        const v = states.map((x) => matvecRows(x, block.wv));
        const mixed: Matrix = states.map(() => new Array(dim).fill(0));
        for (let h = 0; h < heads; h++) {
            const off = h * headDim;
            for (let i = 0; i < states.length; i++) {
                const scores = new Array(states.length).fill(0);
                for (let j = 0; j < states.length; j++) {
                    let dot = 0;
                    for (let d = 0; d < headDim; d++) dot += q[i][off + d] * k[j][off + d];
                    scores[j] = dot * scale;
                }
                softmaxInPlace(scores);
                for (let j = 0; j < states.length; j++) {
                    const weight = scores[j];
                    for (let d = 0; d < headDim; d++) {
                        mixed[i][off + d] += weight * v[j][off + d];
                    }
                }
            }
        }
        return mixed.map((x) => matvecRows(x, block.wo));
    }

    /** Token ids -> per-layer hidden states, (depth + 1) x seq x dim. */
    forward(ids: number[]): Matrix[] {
        if (ids.length > this.config.maxLen) {
            throw new Error(`sequence of ${ids.length} tokens exceeds maxLen ` +
                            `${this.config.maxLen}`);
        }
        let states: Matrix = ids.map((id, pos) =>
            this.tokenEmbedding[id].map((value, d) => value + this.posEmbedding[pos][d]));
        const all: Matrix[] = [states.map((row) => [...row])];
        for (const block of this.blocks) {
            const attended = this.attention(states, block);
            states = states.map((row, i) =>
                layerNorm(row.map((value, d) => value + attended[i][d]),
                          block.ln1Gamma, block.ln1Beta));
            const hidden = states.map((row) =>
                matvecRows(row, block.ffnW1).map((value, j) =>
                    gelu(value + block.ffnB1[j])));
            const ffnOut = hidden.map((row) =>
                matvecRows(row, block.ffnW2).map((value, j) => value + block.ffnB2[j]));
            states = states.map((row, i) =>
                layerNorm(row.map((value, d) => value + ffnOut[i][d]),
                          block.ln2Gamma, block.ln2Beta));
            all.push(states.map((row) => [...row]));
        }
        return all;
    }
}
