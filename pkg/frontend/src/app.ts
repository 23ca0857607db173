/** Questionnaire controller: one in-flight mutation, server-authoritative state. */

import { ApiClient, ApiError } from "./api.js";
import { LEAVE_MS } from "./theme.js";
import { renderDrugList, renderRecommendations, renderView } from "./view.js";
import type {
  CodeRef,
  MutationResult,
  QuestionnaireView,
  Recommendation,
} from "./types.js";

export interface AppElements {
  questionnaire: HTMLElement;
  recommendations: HTMLElement;
  drugList: HTMLElement;
  drugInput: HTMLInputElement;
  drugAdd: HTMLButtonElement;
  status: HTMLElement;
  toast: HTMLElement;
}

export interface ViewModel {
  sessionId: string | null;
  view: QuestionnaireView;
  recommendations: Recommendation[];
  drugs: string[];
  pending: boolean;
}

export class App {
  readonly model: ViewModel = {
    sessionId: null,
    view: { panels: [] },
    recommendations: [],
    drugs: [],
    pending: false,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly el: AppElements,
  ) {
    el.drugAdd.addEventListener("click", () => {
      void this.addDrug(el.drugInput.value.trim());
    });
    el.drugInput.addEventListener("keydown", (event) => {
      if ((event as KeyboardEvent).key === "Enter") {
        void this.addDrug(el.drugInput.value.trim());
      }
    });
  }

  async start(rulebaseId: string, drugs: string[] = []): Promise<void> {
    const created = await this.api.createSession(rulebaseId, drugs);
    this.model.sessionId = created.sessionId;
    this.model.view = created.view;
    this.model.drugs = [...drugs];
    this.model.recommendations = [];
    this.el.status.textContent = `rulebase ${rulebaseId}`;
    this.render();
  }

  /** Checkbox toggle: optimistic, rolled back to server truth on error. */
  async toggle(conditionId: string, checked: boolean): Promise<void> {
    if (this.model.pending || this.model.sessionId === null) return;
    this.model.pending = true;
    this.render();
    try {
      const result = await this.api.answer(this.model.sessionId, conditionId, checked);
      await this.applyMutation(result);
    } catch (error) {
      await this.recoverFromError(error);
    } finally {
      this.model.pending = false;
      this.render();
    }
  }

  async changeCode(conditionId: string, code: CodeRef): Promise<void> {
    if (this.model.pending || this.model.sessionId === null) return;
    this.model.pending = true;
    try {
      const result = await this.api.answer(this.model.sessionId, conditionId, true, {
        system: code.system,
        value: code.value,
      });
      await this.applyMutation(result);
    } catch (error) {
      await this.recoverFromError(error);
    } finally {
      this.model.pending = false;
      this.render();
    }
  }

  async addDrug(drugId: string): Promise<void> {
    if (!drugId) return;
    const next = this.model.drugs.includes(drugId)
      ? [...this.model.drugs]
      : [...this.model.drugs, drugId];
    await this.sendDrugs(next, () => {
      this.el.drugInput.value = "";
    });
  }

  async removeDrug(drugId: string): Promise<void> {
    await this.sendDrugs(this.model.drugs.filter((d) => d !== drugId));
  }

  private async sendDrugs(drugs: string[], onSuccess?: () => void): Promise<void> {
    if (this.model.pending || this.model.sessionId === null) return;
    this.model.pending = true;
    this.render();
    try {
      const result = await this.api.setDrugs(this.model.sessionId, drugs);
      this.model.drugs = drugs;
      onSuccess?.();
      await this.applyMutation(result);
    } catch (error) {
      await this.recoverFromError(error);
    } finally {
      this.model.pending = false;
      this.render();
    }
  }

  /** Fade removed items out, then adopt the authoritative server view. */
  private async applyMutation(result: MutationResult): Promise<void> {
    if (result.diff.disappeared.length > 0) {
      const leaving = result.diff.disappeared
        .map((conditionId) =>
          this.el.questionnaire.querySelector(`[data-condition-id="${conditionId}"]`),
        )
        .filter((node): node is HTMLElement => node !== null);
      if (leaving.length > 0) {
        for (const node of leaving) node.classList.add("leaving");
        await pause(LEAVE_MS);
      }
    }
    this.model.view = result.view;
    this.model.recommendations = result.recommendations;
  }

  private async recoverFromError(error: unknown): Promise<void> {
    const message =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    this.showToast(message);
    if (this.model.sessionId !== null) {
      try {
        const truth = await this.api.getSession(this.model.sessionId);
        this.model.view = truth.view;
        this.model.recommendations = truth.recommendations;
      } catch {
        // server unreachable; keep the last known view
      }
    }
  }

  showToast(message: string): void {
    this.el.toast.textContent = message;
    this.el.toast.classList.add("visible");
    setTimeout(() => this.el.toast.classList.remove("visible"), 4000);
  }

  render(): void {
    renderView(
      this.el.questionnaire,
      this.model.view,
      {
        onToggle: (conditionId, checked) => void this.toggle(conditionId, checked),
        onCodeChange: (conditionId, code) => void this.changeCode(conditionId, code),
      },
      this.model.pending,
    );
    renderRecommendations(this.el.recommendations, this.model.recommendations);
    renderDrugList(
      this.el.drugList,
      this.model.drugs,
      (drugId) => void this.removeDrug(drugId),
      this.model.pending,
    );
    this.el.drugAdd.disabled = this.model.pending;
  }
}

function pause(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
