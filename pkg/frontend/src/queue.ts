// The review queue: renders entries exactly in the order the service
// returned them (ascending confidence — worst first), with keyboard-driven
// decisions, optimistic removal, and rollback on failure.

import { ApiClient, ApiError, QueueItem, Verdict } from "./api.js";
import { clear, el } from "./dom.js";
import { FrameSyntaxError, canonicalFrameString } from "./frames.js";
import { renderTableau } from "./tableau.js";
import { showToast } from "./toast.js";

export interface QueueFilters {
    verb?: string;
    status?: string;
}

export interface QueueViewOptions {
    onEmptyReacquire?: () => void;
}

export class QueueView {
    items: QueueItem[] = [];
    selected = 0;
    filters: QueueFilters = {};

    private listNode: HTMLElement;
    private detailNode: HTMLElement;
    private editing = false;

    constructor(private readonly api: ApiClient, root: HTMLElement,
                private readonly options: QueueViewOptions = {}) {
        this.listNode = el("div", { class: "queue-list", id: "queue-list" });
        this.detailNode = el("div", { class: "queue-detail", id: "queue-detail" });
        root.append(this.listNode, this.detailNode);
        document.addEventListener("keydown", this.onKey);
    }

    dispose(): void {
        document.removeEventListener("keydown", this.onKey);
    }

    async load(): Promise<void> {
        this.items = await this.api.queue({
            limit: 200,
            verb: this.filters.verb,
            status: this.filters.status,
        });
        this.selected = 0;
        this.render();
    }

    async loadMore(): Promise<number> {
        if (!this.items.length) {
            return 0;
        }
        const last = this.items[this.items.length - 1];
        const more = await this.api.queue({
            limit: 200,
            cursor: last.cursor,
            verb: this.filters.verb,
            status: this.filters.status,
        });
        this.items.push(...more);
        this.render();
        return more.length;
    }

    render(): void {
        clear(this.listNode);
        if (!this.items.length) {
            this.listNode.append(this.renderEmptyState());
            clear(this.detailNode);
            return;
        }
        this.selected = Math.min(this.selected, this.items.length - 1);
        this.items.forEach((item, index) => {
            this.listNode.append(this.renderItem(item, index));
        });
        this.renderDetail();
    }

    private renderEmptyState(): HTMLElement {
        const button = el("button", { class: "reacquire", id: "empty-reacquire" },
                          ["re-acquire"]);
        button.addEventListener("click", () => this.options.onEmptyReacquire?.());
        return el("div", { class: "empty-state" }, [
            el("p", {}, ["Nothing left to review."]),
            el("p", {}, ["Run the acquisition again to propose fresh entries:"]),
            button,
        ]);
    }

    private renderItem(item: QueueItem, index: number): HTMLElement {
        const entry = item.entry;
        const node = el("div", {
            class: index === this.selected ? "queue-item selected" : "queue-item",
            "data-entry-id": entry.id,
        }, [
            el("span", { class: "verb" }, [entry.verb_display]),
            el("span", { class: "frame" }, [entry.scf]),
            el("span", { class: "rel-freq", title: "relative frequency" },
               [entry.rel_freq.toFixed(3)]),
            el("span", { class: "confidence", title: "confidence" },
               [entry.confidence.toFixed(3)]),
            el("span", { class: `status-badge status-${entry.status}` }, [entry.status]),
        ]);
        node.addEventListener("click", () => {
            this.selected = index;
            this.editing = false;
            this.render();
        });
        return node;
    }

    private renderDetail(): void {
        clear(this.detailNode);
        const item = this.items[this.selected];
        if (!item) {
            return;
        }
        const entry = item.entry;
        this.detailNode.append(el("h2", {}, [
            `${entry.verb_display}  ${entry.scf}`,
        ]));
        this.detailNode.append(el("p", { class: "entry-numbers" }, [
            `${entry.raw_count} occurrences, rel_freq ${entry.rel_freq.toFixed(3)}, ` +
            `confidence ${entry.confidence.toFixed(3)} (${entry.mode})`,
        ]));
        if (entry.mwe_flags.length) {
            this.detailNode.append(el("p", { class: "mwe-flags" },
                                      [`idiom candidates: ${entry.mwe_flags.join(", ")}`]));
        }
        const actions = el("div", { class: "actions" });
        for (const [verdict, label, key] of [
            ["accept", "accept", "a"], ["reject", "reject", "r"], ["edit", "edit", "e"],
        ] as Array<[Verdict, string, string]>) {
            const button = el("button", { class: `action action-${verdict}` },
                              [`${label} (${key})`]);
            button.addEventListener("click", () => this.act(verdict));
            actions.append(button);
        }
        this.detailNode.append(actions);

        if (this.editing) {
            this.detailNode.append(this.renderEditor(entry.scf));
        }

        if (item.evidence.length) {
            const evidence = el("div", { class: "evidence" },
                                [el("h3", {}, ["evidence"])]);
            for (const sentence of item.evidence) {
                const line = el("p", { class: "evidence-sentence",
                                       "data-sentence-id": sentence.sentence_id });
                for (const token of sentence.tokens) {
                    line.append(el("span",
                                   { class: token.role ? `tok tok-${token.role}` : "tok" },
                                   [token.text]));
                    line.append(" ");
                }
                evidence.append(line);
            }
            this.detailNode.append(evidence);
        }

        if (item.tableau) {
            const block = el("div", { class: "tableau-block" },
                             [el("h3", {}, ["candidate tableau"])]);
            block.append(renderTableau(item.tableau));
            this.detailNode.append(block);
        }
    }

    private renderEditor(current: string): HTMLElement {
        const input = el("input", {
            class: "frame-editor-input",
            id: "frame-editor-input",
            value: current,
        });
        input.value = current;
        const error = el("p", { class: "frame-editor-error", id: "frame-editor-error" });
        const submit = el("button", { class: "frame-editor-submit" }, ["replace frame"]);
        submit.addEventListener("click", () => {
            let canonical: string;
            try {
                canonical = canonicalFrameString(input.value);
            } catch (err) {
                error.textContent = err instanceof FrameSyntaxError
                    ? err.message : String(err);
                return;
            }
            void this.submitDecision("edit", canonical);
        });
        return el("div", { class: "frame-editor" }, [input, submit, error]);
    }

    private onKey = (event: KeyboardEvent): void => {
        if (event.target instanceof HTMLInputElement) {
            return;
        }
        if (event.key === "a") {
            void this.act("accept");
        } else if (event.key === "r") {
            void this.act("reject");
        } else if (event.key === "e") {
            void this.act("edit");
        } else if (event.key === "j" || event.key === "ArrowDown") {
            this.selected = Math.min(this.selected + 1, this.items.length - 1);
            this.editing = false;
            this.render();
        } else if (event.key === "k" || event.key === "ArrowUp") {
            this.selected = Math.max(this.selected - 1, 0);
            this.editing = false;
            this.render();
        }
    };

    private act(verdict: Verdict): Promise<void> | void {
        if (!this.items.length) {
            return;
        }
        if (verdict === "edit") {
            this.editing = true;
            this.render();
            return;
        }
        return this.submitDecision(verdict);
    }

    /** Optimistically drop the item; put it back (with a toast) on failure. */
    async submitDecision(verdict: Verdict, replacement?: string): Promise<void> {
        const index = this.selected;
        const item = this.items[index];
        if (!item) {
            return;
        }
        this.items.splice(index, 1);
        this.editing = false;
        this.render();
        try {
            await this.api.decide(item.entry.id, verdict, { replacement });
        } catch (err) {
            this.items.splice(index, 0, item);
            this.selected = index;
            this.render();
            const status = err instanceof ApiError ? err.status : 0;
            const detail = err instanceof Error ? err.message : String(err);
            showToast(`decision failed (HTTP ${status}): ${detail}`, "error");
        }
    }
}
