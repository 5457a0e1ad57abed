// Typed client for the review service. All state lives server-side; this
// wrapper only shapes requests and surfaces HTTP failures as ApiError.

export interface EntryView {
    id: string;
    verb_key: string;
    verb_display: string;
    scf: string;
    raw_count: number;
    weighted_count: number;
    rel_freq: number;
    confidence: number;
    status: string;
    mode: string;
    mwe_flags: string[];
    origin: string;
}

export interface EvidenceToken {
    text: string;
    role: "" | "verb" | "slot";
}

export interface EvidenceSentence {
    sentence_id: string;
    text: string;
    tokens: EvidenceToken[];
}

export interface TableauRowView {
    scf: string;
    marks: number[];
    winner: boolean;
    credited: boolean;
}

export interface TableauData {
    sentence_id: string;
    constraints: string[];
    rows: TableauRowView[];
}

export interface QueueItem {
    entry: EntryView;
    evidence: EvidenceSentence[];
    tableau: TableauData | null;
    cursor: string;
}

export interface VerbSummary {
    verb_key: string;
    display: string;
    entry_counts: Record<string, number>;
    pending_count: number;
}

export interface HealthInfo {
    status: string;
    store_version: number;
    mode: string;
    config_fingerprint: string;
    corpus_fingerprint: string | null;
}

export interface JobInfo {
    id: string;
    phase: string;
    counters: Record<string, number>;
    done: boolean;
    error: string | null;
    store_version: number | null;
}

export type Verdict = "accept" | "reject" | "edit";

export class ApiError extends Error {
    constructor(public readonly status: number, message: string) {
        super(message);
        this.name = "ApiError";
    }
}

async function expectJson<T>(response: Response): Promise<T> {
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = await response.json();
            if (body && typeof body.detail === "string") {
                detail = body.detail;
            }
        } catch {
            // keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
}

export interface QueueQuery {
    limit?: number;
    status?: string;
    cursor?: string;
    verb?: string;
}

export class ApiClient {
    constructor(private readonly base: string = "") {}

    private url(path: string, params?: Record<string, string>): string {
        const query = params
            ? "?" + new URLSearchParams(params).toString()
            : "";
        return `${this.base}${path}${query}`;
    }

    async health(): Promise<HealthInfo> {
        return expectJson(await fetch(this.url("/api/health")));
    }

    async verbs(): Promise<VerbSummary[]> {
        return expectJson(await fetch(this.url("/api/verbs")));
    }

    async queue(query: QueueQuery = {}): Promise<QueueItem[]> {
        const params: Record<string, string> = {};
        if (query.limit !== undefined) params.limit = String(query.limit);
        if (query.status) params.status = query.status;
        if (query.cursor) params.cursor = query.cursor;
        if (query.verb) params.verb = query.verb;
        return expectJson(await fetch(this.url("/api/queue", params)));
    }

    async entry(entryId: string): Promise<EntryView> {
        return expectJson(await fetch(this.url(`/api/entries/${entryId}`)));
    }

    async decide(entryId: string, verdict: Verdict, options: {
        note?: string;
        replacement?: string;
        clientToken?: string;
    } = {}): Promise<EntryView> {
        const response = await fetch(this.url(`/api/entries/${entryId}/decision`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({
                verdict,
                note: options.note ?? "",
                replacement: options.replacement ?? null,
                client_token: options.clientToken ?? "",
            }),
        });
        return expectJson(response);
    }

    async reacquire(overrides: Record<string, unknown> = {}): Promise<{ job_id: string }> {
        const response = await fetch(this.url("/api/reacquire"), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(overrides),
        });
        return expectJson(response);
    }

    async job(jobId: string): Promise<JobInfo> {
        return expectJson(await fetch(this.url(`/api/jobs/${jobId}`)));
    }
}
