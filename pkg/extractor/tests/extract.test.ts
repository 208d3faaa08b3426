import { describe, expect, it } from "vitest";

import { controlledContexts, extractInContext, extractNc,
         randomContexts } from "../src/extract.js";
import { TinyEncoder } from "../src/model.js";

const model = TinyEncoder.init({ dim: 16, depth: 2, heads: 2, seed: 7 });

function closeTo(a: number[], b: number[], tol = 1e-12): void {
    expect(a.length).toBe(b.length);
    for (let i = 0; i < a.length; i++) expect(Math.abs(a[i] - b[i])).toBeLessThan(tol);
}

describe("extractNc", () => {
    it("single-piece term equals that token's hidden state per layer", () => {
        const result = extractNc(model, ["red"]);
        expect(result.layers).toHaveLength(model.layerCount);
        const { ids, wordSpans } = model.tokenizer.encode("red");
        const [start, end] = wordSpans[0];
        expect(end - start).toBe(1);
        const perLayer = model.forward(ids);
        perLayer.forEach((states, layer) => {
            closeTo(result.layers[layer].get("red")!, states[start]);
        });
    });

    it("multi-piece term is the mean of its subword states", () => {
        const result = extractNc(model, ["reddish"]);
        const { ids, wordSpans } = model.tokenizer.encode("reddish");
        const [start, end] = wordSpans[0];
        expect(end - start).toBeGreaterThan(1);
        const perLayer = model.forward(ids);
        perLayer.forEach((states, layer) => {
            const span = states.slice(start, end);
            const mean = span[0].map((_, d) =>
                span.reduce((acc, row) => acc + row[d], 0) / span.length);
            closeTo(result.layers[layer].get("reddish")!, mean);
        });
    });

    it("rejects untokenizable terms", () => {
        expect(() => extractNc(model, ["~!~"])).toThrow(/no subword tokens/);
    });

    it("is deterministic across repeated runs within 1e-5", () => {
        const first = extractNc(model, ["red", "turquoise", "olive"]);
        const second = extractNc(model, ["red", "turquoise", "olive"]);
        first.layers.forEach((vectors, layer) => {
            for (const [term, vec] of vectors) {
                closeTo(second.layers[layer].get(term)!, vec, 1e-5);
            }
        });
    });
});

describe("extractInContext", () => {
    it("one context equals the single-sentence target state", () => {
        const sentence = "the red fan is there";
        const result = extractInContext(model, new Map([["red", [sentence]]]));
        const { ids, wordSpans } = model.tokenizer.encode(sentence);
        const wordIdx = sentence.split(" ").indexOf("red");
        const [start, end] = wordSpans[wordIdx];
        const perLayer = model.forward(ids);
        perLayer.forEach((states, layer) => {
            const span = states.slice(start, end);
            const mean = span[0].map((_, d) =>
                span.reduce((acc, row) => acc + row[d], 0) / span.length);
            closeTo(result.layers[layer].get("red")!, mean);
        });
    });

    it("repeating a sentence does not change the pooled vector", () => {
        const sentence = "i have a red cup";
        const once = extractInContext(model, new Map([["red", [sentence]]]));
        const twice = extractInContext(model, new Map([["red", [sentence, sentence]]]));
        once.layers.forEach((vectors, layer) => {
            closeTo(twice.layers[layer].get("red")!, vectors.get("red")!, 1e-12);
        });
    });

    it("pools the mean over distinct contexts", () => {
        const a = "the red fan is there";
        const b = "i have a red cup";
        const single = [extractInContext(model, new Map([["red", [a]]])),
                        extractInContext(model, new Map([["red", [b]]]))];
        const pooled = extractInContext(model, new Map([["red", [a, b]]]));
        pooled.layers.forEach((vectors, layer) => {
            const mean = single[0].layers[layer].get("red")!.map((v, d) =>
                (v + single[1].layers[layer].get("red")![d]) / 2);
            closeTo(vectors.get("red")!, mean);
        });
    });

    it("skips and counts sentences missing the target term", () => {
        const result = extractInContext(model, new Map([
            ["red", ["the red fan is there", "the blue cup is there"]],
        ]));
        expect(result.skipped.get("red")).toBe(1);
    });

    it("fails when no context contains the term", () => {
        expect(() => extractInContext(model, new Map([
            ["red", ["the blue cup is there"]],
        ]))).toThrow(/no usable contexts/);
    });

    it("batch size does not affect results", () => {
        const contexts = new Map([["red", [
            "the red fan is there", "i have a red cup", "the cup is red",
        ]]]);
        const small = extractInContext(model, contexts, 1);
        const large = extractInContext(model, contexts, 64);
        small.layers.forEach((vectors, layer) => {
            closeTo(large.layers[layer].get("red")!, vectors.get("red")!, 1e-12);
        });
    });
});

describe("context assembly", () => {
    it("groups template sentences by term through the index", () => {
        const rows = [
            { term: "red", frame: "copula", object: "cup", lineNo: 1 },
            { term: "blue", frame: "copula", object: "cup", lineNo: 2 },
            { term: "red", frame: "possession", object: "cup", lineNo: 3 },
        ];
        const sentences = ["the cup is red", "the cup is blue", "i have a red cup"];
        const grouped = controlledContexts(rows, sentences);
        expect(grouped.get("red")).toEqual(["the cup is red", "i have a red cup"]);
        expect(grouped.get("blue")).toEqual(["the cup is blue"]);
    });

    it("rejects out-of-range index lines", () => {
        expect(() => controlledContexts(
            [{ term: "red", frame: "copula", object: "cup", lineNo: 9 }],
            ["the cup is red"])).toThrow(/outside/);
    });

    it("samples RC contexts without replacement, seeded", () => {
        const corpus = Array.from({ length: 40 }, (_, i) =>
            i % 2 === 0 ? `sentence ${i} with red things` : `sentence ${i} plain`);
        const a = randomContexts(corpus, ["red"], 5, 11);
        const b = randomContexts(corpus, ["red"], 5, 11);
        const c = randomContexts(corpus, ["red"], 5, 12);
        expect(a.get("red")).toEqual(b.get("red"));
        expect(a.get("red")).toHaveLength(5);
        expect(new Set(a.get("red")).size).toBe(5);
        expect(a.get("red")).not.toEqual(c.get("red"));
        for (const sentence of a.get("red")!) {
            expect(sentence.split(" ")).toContain("red");
        }
    });

    it("caps S at the number of available contexts", () => {
        const corpus = ["the red fan", "a red cup", "no match here"];
        const contexts = randomContexts(corpus, ["red"], 366, 3);
        expect(contexts.get("red")).toHaveLength(2);
    });
});
