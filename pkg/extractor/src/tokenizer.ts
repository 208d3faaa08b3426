/** Greedy longest-match subword tokenizer (WordPiece-style).
 *
 * Continuation pieces carry the "##" prefix. The default vocabulary holds
 * the latin letters and digits plus a handful of frequent pieces, so common
 * color terms split into one or two pieces and anything alphanumeric
 * tokenizes; characters outside the vocabulary make a word untokenizable,
 * which callers surface as an extraction error.
 */

export const CLS = "[CLS]";
export const SEP = "[SEP]";

const LETTERS = "abcdefghijklmnopqrstuvwxyz0123456789".split("");

export const DEFAULT_PIECES: string[] = [
    ...LETTERS,
    ...LETTERS.map((c) => `##${c}`),
    "red", "blue", "green", "yellow", "orange", "purple", "pink", "brown",
    "black", "white", "gray", "maroon", "olive", "peach", "aqua", "violet",
    "turquoise", "lavender",
    "the", "is", "there", "have", "a", "i",
    "##er", "##ish", "##ise", "##nder",
    "fan", "skirt", "car", "cup", "lamp",
];

export class Tokenizer {
    readonly vocab: string[];
    private readonly index: Map<string, number>;

    constructor(pieces: string[] = DEFAULT_PIECES) {
        const unique = Array.from(new Set([CLS, SEP, ...pieces]));
        this.vocab = unique;
        this.index = new Map(unique.map((piece, i) => [piece, i]));
    }

    pieceId(piece: string): number {
        const id = this.index.get(piece);
        if (id === undefined) throw new Error(`piece not in vocabulary: ${piece}`);
        return id;
    }

    /** Split one lowercase word into subword pieces. */
    tokenizeWord(word: string): string[] {
        if (word.length === 0) throw new Error("cannot tokenize an empty word");
        const pieces: string[] = [];
        let start = 0;
        while (start < word.length) {
            let end = word.length;
            let found: string | null = null;
            while (end > start) {
                const candidate = (start === 0 ? "" : "##") + word.slice(start, end);
                if (this.index.has(candidate)) {
                    found = candidate;
                    break;
                }
                end--;
            }
            if (found === null) {
                throw new Error(`word ${JSON.stringify(word)} produces no subword tokens`);
            }
            pieces.push(found);
            start = end;
        }
        return pieces;
    }

    /**
     * Encode a space-separated lowercase sentence with delimiters.
     * Returns token ids plus, per input word, its [start, end) token span.
     */
    encode(sentence: string): { ids: number[]; wordSpans: Array<[number, number]> } {
        const words = sentence.trim().toLowerCase().split(/\s+/).filter((w) => w);
        const ids: number[] = [this.pieceId(CLS)];
        const wordSpans: Array<[number, number]> = [];
        for (const word of words) {
            const pieces = this.tokenizeWord(word);
            const start = ids.length;
            for (const piece of pieces) ids.push(this.pieceId(piece));
            wordSpans.push([start, ids.length]);
        }
        ids.push(this.pieceId(SEP));
        return { ids, wordSpans };
    }
}
