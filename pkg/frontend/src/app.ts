/** Single-page consultation flow: every displayed color, probability, and
 * image comes from an API response; the page itself computes nothing. */
import {
  ApiClient,
  Attributes,
  ConsultResponse,
  PaletteEntry,
  fileToBase64,
  formatProbability,
} from "./api.js";

export const ROOM_TYPES = ["living_room", "bedroom", "kitchen"];
export const ROOM_SIZES = ["small", "medium", "big"];
export const ROOM_STYLES = ["modern", "classic", "elegant", "traditional"];
export const ROOM_MOODS = ["warm", "cool", "active", "casual", "playful"];
export const ROOM_TONES = ["dark", "light", "vibrant"];
export const PAINT_PREFERENCES = ["plain_shades", "texture", "wallpaper"];

interface UiSession {
  imageB64: string | null;
  imageUrl: string | null;
  result: ConsultResponse | null;
  feedbackDone: boolean;
  pending: boolean;
}

export class App {
  readonly session: UiSession = {
    imageB64: null,
    imageUrl: null,
    result: null,
    feedbackDone: false,
    pending: false,
  };
  palette: PaletteEntry[] = [];

  private root: HTMLElement;
  private client: ApiClient;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
  }

  async start(): Promise<void> {
    this.renderShell();
    try {
      const info = await this.client.modelInfo();
      this.palette = info.palette;
      this.setModelVersion(info.model_version);
    } catch (err) {
      this.showError(`could not load model info: ${(err as Error).message}`);
    }
  }

  // -- dom scaffolding -------------------------------------------------------

  private renderShell(): void {
    this.root.innerHTML = `
      <h1>Interior color consultation</h1>
      <p id="model-version" class="muted"></p>
      <form id="consult-form">
        <fieldset id="controls">
          <label>Room photo <input type="file" id="image-input" accept="image/png,image/jpeg"></label>
          ${this.select("room_type", ROOM_TYPES)}
          ${this.select("room_size", ROOM_SIZES, "medium")}
          ${this.select("room_style", ROOM_STYLES)}
          ${this.select("room_mood", ROOM_MOODS)}
          ${this.select("room_tone", ROOM_TONES, "light")}
          ${this.select("paint_preference", PAINT_PREFERENCES)}
          <fieldset id="color-preferences"><legend>Preferred families (optional)</legend></fieldset>
          <label>Detections JSON (from your detector)
            <textarea id="detections-input" rows="4" placeholder='{"image": ..., "detections": [...]}'></textarea>
          </label>
          <label>or detector endpoint <input type="text" id="endpoint-input" placeholder="http://..."></label>
          <button type="submit" id="consult-button">Get recommendations</button>
        </fieldset>
      </form>
      <p id="status" role="alert"></p>
      <section id="results" hidden>
        <div id="warning" hidden></div>
        <div id="comparison"></div>
        <div id="feedback-controls" hidden>
          <button id="reject-button" type="button">None of these fit</button>
          <span id="feedback-status"></span>
        </div>
      </section>
      <section id="admin">
        <button id="retrain-button" type="button">Retrain model</button>
      </section>
    `;
    const prefs = this.root.querySelector("#color-preferences")!;
    for (let id = 0; id < 10; id += 1) {
      const label = document.createElement("label");
      label.innerHTML = `<input type="checkbox" class="pref-box" value="${id}"> family ${id}`;
      prefs.appendChild(label);
    }
    this.root.querySelector("#consult-form")!.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.consult();
    });
    this.root.querySelector("#image-input")!.addEventListener("change", (event) => {
      void this.onImageChosen(event);
    });
    this.root.querySelector("#reject-button")!.addEventListener("click", () => void this.sendFeedback(null));
    this.root.querySelector("#retrain-button")!.addEventListener("click", () => void this.retrain());
  }

  private select(name: string, options: string[], selected = options[0]): string {
    const opts = options
      .map((o) => `<option value="${o}"${o === selected ? " selected" : ""}>${o.replace("_", " ")}</option>`)
      .join("");
    return `<label>${name.replace("_", " ")} <select id="${name}">${opts}</select></label>`;
  }

  // -- state + helpers ---------------------------------------------------------

  private element<T extends HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  private setPending(pending: boolean): void {
    this.session.pending = pending;
    this.element<HTMLButtonElement>("#consult-button").disabled = pending;
    this.element<HTMLButtonElement>("#retrain-button").disabled = pending;
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(".accept-button, #reject-button")) {
      button.disabled = pending || this.session.feedbackDone || this.session.result === null;
    }
  }

  private showError(message: string): void {
    const status = this.element<HTMLElement>("#status");
    status.textContent = message;
    status.classList.add("error");
  }

  private showStatus(message: string): void {
    const status = this.element<HTMLElement>("#status");
    status.textContent = message;
    status.classList.remove("error");
  }

  private setModelVersion(version: number | null): void {
    this.element<HTMLElement>("#model-version").textContent =
      version === null ? "no trained model yet" : `model version ${version}`;
  }

  readAttributes(): Attributes {
    const value = (id: string) => this.element<HTMLSelectElement>(`#${id}`).value;
    const prefs = [...this.root.querySelectorAll<HTMLInputElement>(".pref-box:checked")].map((b) =>
      Number(b.value),
    );
    return {
      room_type: value("room_type"),
      room_size: value("room_size"),
      room_style: value("room_style"),
      room_mood: value("room_mood"),
      room_tone: value("room_tone"),
      color_preferences: prefs,
      paint_preference: value("paint_preference"),
    };
  }

  private async onImageChosen(event: Event): Promise<void> {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    this.session.imageB64 = await fileToBase64(file);
    this.session.imageUrl = `data:${file.type || "image/png"};base64,${this.session.imageB64}`;
    this.showStatus(`loaded ${file.name || "image"} (${file.size} bytes)`);
  }

  // -- flows ----------------------------------------------------------------------

  async consult(): Promise<void> {
    if (this.session.pending) return;
    if (!this.session.imageB64) {
      this.showError("choose a room photo first");
      return;
    }
    let detections: unknown;
    const rawDetections = this.element<HTMLTextAreaElement>("#detections-input").value.trim();
    const endpoint = this.element<HTMLInputElement>("#endpoint-input").value.trim();
    if (rawDetections) {
      try {
        detections = JSON.parse(rawDetections);
      } catch (err) {
        this.showError(`detections JSON does not parse: ${(err as Error).message}`);
        return;
      }
    }
    this.setPending(true);
    this.showStatus("consulting...");
    try {
      const result = await this.client.consult(
        this.session.imageB64,
        this.readAttributes(),
        detections,
        endpoint || undefined,
      );
      this.session.result = result;
      this.session.feedbackDone = false;
      this.renderResult(result);
      this.showStatus(`consultation ${result.consultation_id} (model v${result.model_version})`);
    } catch (err) {
      this.showError((err as Error).message); // form state is untouched on failure
    } finally {
      this.setPending(false);
    }
  }

  private renderResult(result: ConsultResponse): void {
    this.element<HTMLElement>("#results").hidden = false;
    const warning = this.element<HTMLElement>("#warning");
    warning.hidden = result.warning === null;
    warning.textContent = result.warning ?? "";

    const comparison = this.element<HTMLElement>("#comparison");
    comparison.innerHTML = "";
    comparison.appendChild(this.card("original", this.imageElement(this.session.imageUrl!)));

    result.recommendations.forEach((entry, index) => {
      const title = `${entry.name} ${formatProbability(entry.probability)}`;
      const render = result.renders_b64[index];
      const visual = render !== undefined
        ? this.imageElement(`data:image/png;base64,${render}`)
        : this.swatchElement(entry.family_id);
      const card = this.card(title, visual);
      const accept = document.createElement("button");
      accept.type = "button";
      accept.className = "accept-button";
      accept.dataset.familyId = String(entry.family_id);
      accept.textContent = `Accept ${entry.name}`;
      accept.addEventListener("click", () => void this.sendFeedback(entry.family_id));
      card.appendChild(accept);
      comparison.appendChild(card);
    });
    this.element<HTMLElement>("#feedback-controls").hidden = false;
    this.element<HTMLElement>("#feedback-status").textContent = "";
    this.setPending(false);
  }

  private card(title: string, visual: HTMLElement): HTMLElement {
    const card = document.createElement("figure");
    card.className = "card";
    card.appendChild(visual);
    const caption = document.createElement("figcaption");
    caption.textContent = title;
    card.appendChild(caption);
    return card;
  }

  private imageElement(src: string): HTMLImageElement {
    const img = document.createElement("img");
    img.src = src;
    img.alt = "room render";
    return img;
  }

  private swatchElement(familyId: number): HTMLElement {
    const swatch = document.createElement("div");
    swatch.className = "swatch";
    const entry = this.palette.find((p) => p.id === familyId);
    if (entry) {
      const [r, g, b] = entry.representative;
      swatch.style.backgroundColor = `rgb(${r}, ${g}, ${b})`;
      swatch.title = entry.name;
    }
    return swatch;
  }

  async sendFeedback(familyId: number | null): Promise<void> {
    const result = this.session.result;
    if (!result || this.session.feedbackDone || this.session.pending) return;
    this.setPending(true);
    try {
      const ack =
        familyId === null
          ? await this.client.feedback(result.consultation_id, "rejected")
          : await this.client.feedback(result.consultation_id, "accepted", familyId);
      this.session.feedbackDone = true;
      this.element<HTMLElement>("#feedback-status").textContent =
        ack.outcome === "accepted"
          ? `thanks — saved (dataset now ${ack.dataset_rows} rows)`
          : "thanks — noted that none fit";
    } catch (err) {
      this.showError((err as Error).message);
    } finally {
      this.setPending(false);
    }
  }

  async retrain(): Promise<void> {
    if (this.session.pending) return;
    this.setPending(true);
    this.showStatus("retraining...");
    try {
      const { model_version } = await this.client.retrain();
      this.setModelVersion(model_version);
      this.showStatus(`retrained: model version ${model_version}`);
    } catch (err) {
      this.showError((err as Error).message);
    } finally {
      this.setPending(false);
    }
  }
}

export function initApp(root: HTMLElement, baseUrl: string): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.start();
  return app;
}
