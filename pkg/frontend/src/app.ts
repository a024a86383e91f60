import { ApiClient } from "./api.js";
import { clear, h } from "./dom.js";
import { renderMarkdown } from "./markdown.js";
import {
  ApiError,
  CriterionInfo,
  Decision,
  Progress,
  QueueItemView,
} from "./types.js";

const EVIDENCE_PLACEHOLDER = "no sentence extracted";

type View = "curate" | "progress" | "report";

const SHORTCUTS: Record<string, Decision> = {
  y: "yes",
  n: "no",
  c: "complicated",
};

/** One-item-per-screen curation client. Curators see only the blinded
 * queue payload; keyboard shortcuts y/n/c submit decisions directly. */
export class CurationApp {
  readonly api: ApiClient;
  curator: string;
  criterion = "";
  criteria: CriterionInfo[] = [];
  currentItem: QueueItemView | null = null;
  private view: View = "curate";
  private busy = false;
  private selectedDecision: Decision | null = null;
  private root!: HTMLElement;
  private main!: HTMLElement;
  private noticeEl!: HTMLElement;
  private keyListener = (event: KeyboardEvent) => this.onKey(event);

  constructor(api: ApiClient, curator: string) {
    this.api = api;
    this.curator = curator;
  }

  async mount(root: HTMLElement): Promise<void> {
    this.root = root;
    this.criteria = await this.api.criteria();
    if (!this.criterion && this.criteria.length) {
      this.criterion = this.criteria[0].id;
    }
    this.renderShell();
    document.addEventListener("keydown", this.keyListener);
    await this.showCurate();
  }

  unmount(): void {
    document.removeEventListener("keydown", this.keyListener);
    clear(this.root);
  }

  private renderShell(): void {
    clear(this.root);
    const select = h("select", { id: "criterion-select" }) as HTMLSelectElement;
    for (const info of this.criteria) {
      select.append(h("option", { value: info.id }, [info.id]));
    }
    select.value = this.criterion;
    select.addEventListener("change", () => {
      this.criterion = select.value;
      void this.showView(this.view);
    });

    const curatorInput = h("input", {
      id: "curator-input",
      value: this.curator,
      placeholder: "curator id",
    }) as HTMLInputElement;
    curatorInput.addEventListener("change", () => {
      this.curator = curatorInput.value.trim();
    });

    const nav = h("nav", {}, [
      this.navButton("nav-curate", "Curate", "curate"),
      this.navButton("nav-progress", "Progress", "progress"),
      this.navButton("nav-report", "Report", "report"),
    ]);

    this.noticeEl = h("div", { id: "notice", role: "status" });
    this.main = h("main", { id: "view" });
    this.root.append(
      h("header", {}, [
        h("strong", {}, ["rigorscreen curation"]),
        select,
        curatorInput,
        nav,
      ]),
      this.noticeEl,
      this.main,
    );
  }

  private navButton(id: string, label: string, view: View): HTMLElement {
    const btn = h("button", { id, type: "button" }, [label]);
    btn.addEventListener("click", () => void this.showView(view));
    return btn;
  }

  async showView(view: View): Promise<void> {
    this.view = view;
    if (view === "curate") await this.showCurate();
    else if (view === "progress") await this.showProgress();
    else await this.showReport();
  }

  private notice(text: string): void {
    this.noticeEl.textContent = text;
  }

  // --- curation view ----------------------------------------------------

  async showCurate(): Promise<void> {
    this.view = "curate";
    clear(this.main);
    this.currentItem = null;
    this.selectedDecision = null;
    this.main.append(h("p", { id: "loading" }, ["Fetching next item..."]));
    try {
      const res = await this.api.queueNext(this.criterion, this.curator);
      clear(this.main);
      if (res.done) {
        this.renderCompletion(res.progress);
      } else {
        this.currentItem = res.item;
        this.renderItem(res.item);
      }
    } catch (err) {
      this.renderFetchError(err);
    }
  }

  private renderFetchError(err: unknown): void {
    clear(this.main);
    this.currentItem = null;
    const message = err instanceof Error ? err.message : String(err);
    const retry = h("button", { id: "retry", type: "button" }, ["Retry"]);
    retry.addEventListener("click", () => void this.showCurate());
    this.main.append(
      h("div", { id: "error-banner", class: "error" }, [
        h("p", {}, [`Could not reach the curation service: ${message}`]),
        retry,
      ]),
    );
  }

  private renderCompletion(progress: Progress): void {
    this.main.append(
      h("section", { id: "completion" }, [
        h("h2", {}, ["Queue complete"]),
        h("p", {}, [
          `Disagreements labeled: ${progress.disagreement_done} of ` +
            `${progress.disagreement_total}.`,
        ]),
        h("p", {}, [
          `Controls labeled: ${progress.control_done} of ` +
            `${progress.control_total}.`,
        ]),
        h("p", {}, [
          `Second-pass items pending: ${progress.pass2_pending}.`,
        ]),
      ]),
    );
  }

  private renderItem(item: QueueItemView): void {
    const evidence = item.displayed_evidence
      ? h("blockquote", { id: "evidence" }, [item.displayed_evidence])
      : h("blockquote", { id: "evidence", class: "placeholder" }, [
          EVIDENCE_PLACEHOLDER,
        ]);

    const decisions: [Decision, string, string][] = [
      ["yes", "decision-yes", "Yes (y)"],
      ["no", "decision-no", "No (n)"],
      ["complicated", "decision-complicated", "Complicated (c)"],
    ];
    const submit = h("button", {
      id: "submit",
      type: "button",
      disabled: true,
    }, ["Submit"]) as HTMLButtonElement;
    const buttons = decisions.map(([decision, id, label]) => {
      const btn = h("button", { id, type: "button", "data-decision": decision }, [label]);
      btn.addEventListener("click", () => {
        this.selectedDecision = decision;
        submit.disabled = false;
        for (const other of this.main.querySelectorAll("[data-decision]")) {
          other.classList.toggle("selected", other === btn);
        }
      });
      return btn;
    });
    submit.addEventListener("click", () => {
      if (this.selectedDecision) void this.submit(this.selectedDecision);
    });

    this.main.append(
      h("article", { id: "item-card" }, [
        h("p", { id: "pass-badge", class: "badge" }, [`Pass ${item.pass}`]),
        h("p", {}, [
          h("a", {
            id: "paper-link",
            href: item.paper_link,
            target: "_blank",
            rel: "noopener noreferrer",
          }, ["Open paper"]),
        ]),
        evidence,
        h("details", { id: "help-panel" }, [
          h("summary", {}, ["What counts for this criterion?"]),
          h("p", { id: "criterion-description" }, [item.criterion_description]),
        ]),
        h("div", { id: "decision-row" }, buttons),
        h("label", {}, [
          "Notes",
          h("textarea", { id: "notes1", rows: "2" }),
        ]),
        h("label", {}, [
          "More notes",
          h("textarea", { id: "notes2", rows: "2" }),
        ]),
        submit,
        h("p", { id: "field-errors", class: "error" }),
      ]),
    );
  }

  private onKey(event: KeyboardEvent): void {
    if (this.view !== "curate" || this.busy || !this.currentItem) return;
    const target = event.target as HTMLElement | null;
    if (target && ["INPUT", "TEXTAREA", "SELECT"].includes(target.tagName)) {
      return;
    }
    const decision = SHORTCUTS[event.key.toLowerCase()];
    if (decision) {
      event.preventDefault();
      void this.submit(decision);
    }
  }

  async submit(decision: Decision): Promise<void> {
    const item = this.currentItem;
    if (!item || this.busy) return;
    this.busy = true;
    const notes = (this.main.querySelector("#notes1") as HTMLTextAreaElement | null)?.value ?? "";
    const notes2 = (this.main.querySelector("#notes2") as HTMLTextAreaElement | null)?.value ?? "";
    try {
      const ack = await this.api.submitLabel({
        item_id: item.item_id,
        decision,
        curator: this.curator,
        pass: item.pass,
        notes,
        notes2,
      });
      this.notice(
        ack.pass2_queued
          ? "Recorded as complicated; this item returns in pass 2."
          : `Recorded "${decision}".`,
      );
      this.busy = false;
      await this.showCurate();
    } catch (err) {
      this.busy = false;
      if (err instanceof ApiError && err.status === 409) {
        this.notice(`Item was already labeled elsewhere; skipping. (${err.message})`);
        await this.showCurate();
        return;
      }
      if (err instanceof ApiError && err.status === 400) {
        const box = this.main.querySelector("#field-errors");
        if (box) {
          box.textContent = err.fields.length
            ? `Invalid fields: ${err.fields.join(", ")}`
            : err.message;
        }
        return;
      }
      this.renderFetchError(err);
    }
  }

  // --- progress view ------------------------------------------------------

  async showProgress(): Promise<void> {
    this.view = "progress";
    clear(this.main);
    try {
      const progress = await this.api.progress(this.criterion);
      const bar = (done: number, total: number, id: string) => {
        const pct = total ? Math.round((100 * done) / total) : 0;
        const fill = h("div", { class: "bar-fill", style: `width:${pct}%` });
        return h("div", { id, class: "bar" }, [
          fill,
          h("span", {}, [`${done} / ${total}`]),
        ]);
      };
      this.main.append(
        h("section", { id: "progress-view" }, [
          h("h2", {}, [`Progress: ${this.criterion}`]),
          h("p", {}, ["Disagreement queue"]),
          bar(progress.disagreement_done, progress.disagreement_total, "bar-disagreement"),
          h("p", {}, ["Control set"]),
          bar(progress.control_done, progress.control_total, "bar-control"),
          h("p", { id: "pass2-line" }, [
            `Pass 2: ${progress.pass2_done} done, ${progress.pass2_pending} pending.`,
          ]),
        ]),
      );
    } catch (err) {
      this.renderFetchError(err);
    }
  }

  // --- report view ----------------------------------------------------------

  async showReport(): Promise<void> {
    this.view = "report";
    clear(this.main);
    try {
      const payload = await this.api.report(this.criterion, "md");
      if (payload === null || !payload.content) {
        this.main.append(
          h("p", { id: "report-pending" }, [
            "Evaluation pending: finish curation to build this report.",
          ]),
        );
        return;
      }
      const container = h("section", { id: "report-view" });
      container.innerHTML = renderMarkdown(payload.content);
      this.main.append(container);
    } catch (err) {
      this.renderFetchError(err);
    }
  }
}
