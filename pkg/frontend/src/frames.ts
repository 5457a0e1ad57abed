// Client-side mirror of the frame grammar, so an edited frame string is
// rejected locally before it ever reaches the decision endpoint.

const SIMPLE_ORDER: Record<string, number> = { SN: 0, SINF: 1, SA: 2, COMPL: 3 };
const SP_PATTERN = /^SP\[(.+)\+(SN|SINF)\]$/;

export class FrameSyntaxError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "FrameSyntaxError";
    }
}

type LabelKey = [number, string, number];

function labelKey(label: string): LabelKey {
    if (label in SIMPLE_ORDER) {
        return [SIMPLE_ORDER[label], "", 0];
    }
    const match = SP_PATTERN.exec(label);
    if (match) {
        return [4, match[1], match[2] === "SN" ? 0 : 1];
    }
    throw new FrameSyntaxError(`unknown constituent label "${label}"`);
}

function compareKeys(a: LabelKey, b: LabelKey): number {
    if (a[0] !== b[0]) return a[0] - b[0];
    if (a[1] !== b[1]) return a[1] < b[1] ? -1 : 1;
    return a[2] - b[2];
}

/** Parse a frame string into its canonically ordered constituent labels. */
export function parseFrame(text: string): string[] {
    const trimmed = text.trim();
    if (!trimmed) {
        throw new FrameSyntaxError("empty frame string");
    }
    if (trimmed === "INTRANS") {
        return [];
    }
    const labels = trimmed.split("_");
    const keyed = labels.map((label) => [labelKey(label), label] as const);
    keyed.sort((a, b) => compareKeys(a[0], b[0]));
    return keyed.map(([, label]) => label);
}

/** Canonical rendering of a frame string (throws on bad labels). */
export function canonicalFrameString(text: string): string {
    const labels = parseFrame(text);
    return labels.length ? labels.join("_") : "INTRANS";
}

export function isValidFrame(text: string): boolean {
    try {
        parseFrame(text);
        return true;
    } catch {
        return false;
    }
}
