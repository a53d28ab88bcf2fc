package gm;

import java.io.File;
import java.util.ArrayList;
import java.util.List;

public class GMOperation {
    private final List images = new ArrayList();
    private String lastError;

    public void addImage(File file) {
        if (file == null) {
            throw new IllegalArgumentException("file must not be null");
        }
        images.add(file.getPath());
    }

    public int imageCount() {
        return images.size();
    }

    public void reset() {
        images.clear();
    }
}
