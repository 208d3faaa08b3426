/** Deterministic PRNG (mulberry32) with a Box-Muller gaussian. */
export class Rng {
    private state: number;
    private spare: number | null = null;

    constructor(seed: number) {
        this.state = seed >>> 0;
        if (this.state === 0) this.state = 0x9e3779b9;
    }

    /** Uniform in [0, 1). */
    next(): number {
        this.state = (this.state + 0x6d2b79f5) >>> 0;
        let t = this.state;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    }

    gaussian(mean = 0, std = 1): number {
        if (this.spare !== null) {
            const value = this.spare;
            this.spare = null;
            return mean + std * value;
        }
        let u = 0;
        let v = 0;
        while (u === 0) u = this.next();
        v = this.next();
        const radius = Math.sqrt(-2.0 * Math.log(u));
        this.spare = radius * Math.sin(2.0 * Math.PI * v);
        return mean + std * radius * Math.cos(2.0 * Math.PI * v);
    }

    /** Uniform sample of k distinct indices from [0, n) (partial Fisher-Yates). */
    sampleWithoutReplacement(n: number, k: number): number[] {
        if (k > n) throw new Error(`cannot sample ${k} of ${n} without replacement`);
        const pool = Array.from({ length: n }, (_, i) => i);
        for (let i = 0; i < k; i++) {
            const j = i + Math.floor(this.next() * (n - i));
            [pool[i], pool[j]] = [pool[j], pool[i]];
        }
        return pool.slice(0, k);
    }
}
