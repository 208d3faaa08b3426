/** File IO for the embedding-directory interchange format and the template
 * index consumed from the analysis toolkit. */

import * as fs from "node:fs";
import * as path from "node:path";

export interface TemplateRow {
    term: string;
    frame: string;
    object: string;
    lineNo: number;
}

export function readTemplateIndex(indexPath: string): TemplateRow[] {
    const lines = fs.readFileSync(indexPath, "utf-8").split("\n").filter((l) => l);
    const header = lines[0].split("\t");
    const expected = ["term", "frame", "object", "line_no"];
    if (header.join(",") !== expected.join(",")) {
        throw new Error(`unexpected index header: ${lines[0]}`);
    }
    return lines.slice(1).map((line, i) => {
        const fields = line.split("\t");
        if (fields.length !== 4) {
            throw new Error(`index line ${i + 2}: expected 4 fields, got ${fields.length}`);
        }
        return {
            term: fields[0],
            frame: fields[1],
            object: fields[2],
            lineNo: parseInt(fields[3], 10),
        };
    });
}

export function readLines(filePath: string): string[] {
    return fs.readFileSync(filePath, "utf-8").split("\n")
        .map((l) => l.trim()).filter((l) => l.length > 0);
}

/** One vector per term; JS number formatting round-trips exactly. */
export function writeVecFile(filePath: string, vectors: Map<string, number[]>): void {
    let dim = -1;
    const rows: string[] = [];
    for (const [term, vector] of vectors) {
        if (dim === -1) dim = vector.length;
        if (vector.length !== dim) {
            throw new Error(`vector for ${term} has dim ${vector.length}, expected ${dim}`);
        }
        rows.push(`${term} ${vector.map((v) => String(v)).join(" ")}`);
    }
    fs.writeFileSync(filePath, `${vectors.size} ${dim}\n${rows.join("\n")}\n`);
}

export function writeEmbeddingDirectory(
    dir: string,
    modelId: string,
    config: "NC" | "RC" | "CC",
    layers: Array<Map<string, number[]>>,
): void {
    fs.mkdirSync(dir, { recursive: true });
    const manifest = `model=${modelId}\nconfig=${config}\nlayers=${layers.length}\n`;
    fs.writeFileSync(path.join(dir, "manifest.txt"), manifest);
    layers.forEach((vectors, layer) => {
        const name = `layer${String(layer).padStart(2, "0")}.vec`;
        writeVecFile(path.join(dir, name), vectors);
    });
}

/** Minimal reader mirroring the toolkit's loader contract; used in tests. */
export function readVecFile(filePath: string): Map<string, number[]> {
    const lines = fs.readFileSync(filePath, "utf-8").split("\n").filter((l) => l);
    const [countStr, dimStr] = lines[0].split(" ");
    const count = parseInt(countStr, 10);
    const dim = parseInt(dimStr, 10);
    const vectors = new Map<string, number[]>();
    for (const line of lines.slice(1)) {
        const fields = line.split(" ");
        const term = fields[0];
        const values = fields.slice(1).map(Number);
        if (values.length !== dim) {
            throw new Error(`term ${term}: ${values.length} values, expected ${dim}`);
        }
        if (values.some((v) => !Number.isFinite(v))) {
            throw new Error(`term ${term}: non-finite value`);
        }
        if (vectors.has(term)) throw new Error(`duplicate term ${term}`);
        vectors.set(term, values);
    }
    if (vectors.size !== count) {
        throw new Error(`header declares ${count} terms, file has ${vectors.size}`);
    }
    return vectors;
}
