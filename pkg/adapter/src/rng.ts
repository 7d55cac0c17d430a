/** Small deterministic PRNG so generated corpora are reproducible across
 * runs and platforms. sfc32 stream, state filled from the seed sequence
 * through an FNV-1a absorb and a splitmix32 expansion. */

export class Rng {
  private a: number;
  private b: number;
  private c: number;
  private d: number;

  constructor(...seeds: number[]) {
    let h = 0x811c9dc5;
    for (const value of seeds) {
      h = (h ^ (value >>> 0)) >>> 0;
      h = Math.imul(h, 0x01000193) >>> 0;
    }
    let s = h;
    const mix = () => {
      s = (s + 0x9e3779b9) >>> 0;
      let z = s;
      z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
      z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
      return (z ^ (z >>> 15)) >>> 0;
    };
    this.a = mix();
    this.b = mix();
    this.c = mix();
    this.d = mix();
    for (let i = 0; i < 12; i++) {
      this.nextUint32();
    }
  }

  nextUint32(): number {
    const t = (((this.a + this.b) >>> 0) + this.d) >>> 0;
    this.d = (this.d + 1) >>> 0;
    this.a = this.b ^ (this.b >>> 9);
    this.b = (this.c + (this.c << 3)) >>> 0;
    this.c = ((this.c << 21) | (this.c >>> 11)) >>> 0;
    this.c = (this.c + t) >>> 0;
    return t;
  }

  /** Uniform float in [0, 1). */
  random(): number {
    return this.nextUint32() / 4294967296;
  }

  /** Uniform integer in [0, maxExclusive). */
  int(maxExclusive: number): number {
    return Math.floor(this.random() * maxExclusive);
  }
}

/** Categorical sampler over a probability table, keyed in sorted order so
 * the draw sequence is independent of object key insertion order. */
export class Categorical {
  private readonly labels: string[];
  private readonly cumulative: number[];

  constructor(table: Record<string, number>) {
    this.labels = Object.keys(table).sort();
    let acc = 0;
    this.cumulative = this.labels.map((label) => (acc += table[label]));
  }

  sample(rng: Rng): string {
    const u = rng.random();
    for (let i = 0; i < this.cumulative.length; i++) {
      if (u < this.cumulative[i]) {
        return this.labels[i];
      }
    }
    // rounding slack lands in the last bucket
    return this.labels[this.labels.length - 1];
  }
}
